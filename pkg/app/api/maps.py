from pathlib import Path

from app.api.base import CommandRouter
from app.config.experiment import ExperimentConfig
from app.services.experiments import TailsService

router = CommandRouter(tags=["Maps"])


@router.command("tails", summary="Таблицы x_n, y_n и хвостов mu(phi > n)")
def tails(config: ExperimentConfig) -> list[Path]:
    return TailsService(config).run()
