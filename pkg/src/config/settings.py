from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple


@dataclass
class OptimizerConfig:
    mesh_size: int = 1024
    tolerance: float = 1e-10
    # Unbounded tangency sides start this wide and double while the optimum sits on the far edge
    initial_span: float = 10.0
    max_extensions: int = 6
    max_abs_tangency: float = 60.0
    endpoint_eps: float = 1e-8
    anchor_gap: float = 1e-6
    # Searches next to log(1 - 1/L) stop where the leveraged gross daily return 1 + L(e^y - 1) drops to this
    singular_floor: float = 1e-3


@dataclass
class MarketConfig:
    trading_days: int = 252
    periods_per_year: Dict[str, int] = field(default_factory=lambda: {
        "daily": 252,
        "weekly": 52,
        "monthly": 12,
        "quarterly": 4,
        "semiannual": 2,
        "annual": 1,
    })
    # Gross price-ratio limits (exp(y0), exp(y1)) per rebalancing schedule
    schedule_windows: Dict[str, Tuple[float, float]] = field(default_factory=lambda: {
        "daily": (0.8, 1.2),
        "weekly": (0.7, 1.3),
        "monthly": (0.6, 1.5),
        "quarterly": (0.5, 1.8),
        "semiannual": (0.5, 2.0),
        "annual": (0.5, 2.5),
    })


@dataclass
class VerifyConfig:
    seed: int = 1
    trials: int = 10000
    n_range: Tuple[int, int] = (1, 100)
    slack: float = 1e-9
    random_series_per_query: int = 4


@dataclass
class LoggingConfig:
    log_level: str = "INFO"
    log_file: Optional[str] = None
    use_tqdm: bool = True


@dataclass
class OutputConfig:
    significant_digits: int = 10
    output_dir: str = "outputs"


class Settings:
    def __init__(self):
        self.optimizer_config = OptimizerConfig()
        self.market_config = MarketConfig()
        self.verify_config = VerifyConfig()
        self.logging_config = LoggingConfig()
        self.output_config = OutputConfig()

    def get_shiller_path(self) -> str:
        return "data/raw/shiller_annual.csv"

    def format_number(self, value: float) -> str:
        return f"{value:.{self.output_config.significant_digits}g}"


settings = Settings()
