from pathlib import Path

from app.api.base import CommandRouter
from app.config.experiment import ExperimentConfig
from app.services.experiments import ContourService, KernelService, PolysService

router = CommandRouter(tags=["Tauberian"])


@router.command(
    "kernel", summary="Извлечение частичных сумм ядром Коревара", options=("sequence", "p", "beta", "n_values")
)
def kernel(config: ExperimentConfig) -> list[Path]:
    return KernelService(config).run()


@router.command(
    "contour", summary="Контурные интегралы с известным ответом", options=("check", "beta", "rho", "u", "theta", "R")
)
def contour(config: ExperimentConfig) -> list[Path]:
    return ContourService(config).run()


@router.command("polys", summary="Односторонние многочлены Карамата и Фройда", options=("epsilons", "degrees", "beta"))
def polys(config: ExperimentConfig) -> list[Path]:
    return PolysService(config).run()
