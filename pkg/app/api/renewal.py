from pathlib import Path

from app.api.base import CommandRouter
from app.config.experiment import ExperimentConfig
from app.services.experiments import DualErgodicService, RenewalService

router = CommandRouter(tags=["Renewal"])


@router.command("renewal", summary="Скалярная последовательность обновления и её разложение", options=("beta",))
def renewal(config: ExperimentConfig) -> list[Path]:
    return RenewalService(config).run()


@router.command(
    "dual-ergodic",
    summary="Равномерная дуальная эргодичность для оператора перехода",
    options=("sequence", "ladder_depth"),
)
def dual_ergodic(config: ExperimentConfig) -> list[Path]:
    """Строит оператор R(z), плотность h и частичные суммы T_n."""
    return DualErgodicService(config).run()
