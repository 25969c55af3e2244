from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    LOG_LEVEL: str = "INFO"
    OUTPUT_DIR: str = "results"
    CSV_DIGITS: int = 17

    ROOT_XTOL: float = 1e-15
    ROOT_RTOL: float = 4 * 2.220446049250313e-16
    NEWTON_MAXITER: int = 60

    MASS_DEFICIT_BOUND: float = 0.15
    POWER_ITER_MAX: int = 5000
    POWER_ITER_TOL: float = 1e-12
    DENSITY_TOL: float = 1e-10
    EIGENGAP_MIN: float = 0.05
    DEFLATION_STEPS: int = 60
    MAX_ESCAPE_MASS: float = 1e-6
    MONOTONE_TOL: float = 1e-8

    RENEWAL_NMAX_LIMIT: int = 2_000_000
    RENEWAL_BLOCK: int = 256
    SCALAR_DIRECT_CUTOFF: int = 64

    CH_CUTOFF: int = 1_000_000

    QUAD_EPSABS: float = 1e-12
    QUAD_EPSREL: float = 1e-10
    QUAD_LIMIT: int = 2000
    QUAD_ERROR_CAP: float = 1e-7
    KERNEL_NODES: int = 16
    KERNEL_MAX_LEVEL: int = 8
    KERNEL_TOL: float = 1e-9
    KERNEL_SERIES_SPAN: int = 40

    POLY_DEGREE_CAP: int = 1 << 15
    POLY_GRID: int = 10_000
    FREUD_MIN_DEGREE: int = 2
    FREUD_FIT_GRID: int = 4000
    FREUD_BETA: float = 0.5

    SLOPE_CONFIDENCE: float = 0.95
    SAMPLES_PER_DECADE: int = 8

    @property
    def ROOT_TOL(self):
        return 10 * self.ROOT_XTOL


settings = Settings()
