import math
from pathlib import Path

import pytest

from src.config.settings import settings
from src.models.core_model import BoundWindow
from src.utils.logger import setup_logger

RAW_DIR = Path(__file__).resolve().parent.parent / "data" / "raw"


@pytest.fixture(autouse=True)
def quiet_progress():
    previous = settings.logging_config.use_tqdm
    settings.logging_config.use_tqdm = False
    yield
    settings.logging_config.use_tqdm = previous
    # CLI runs rebind the console handler to a per-test stream
    setup_logger("leveraged_bounds", level="WARNING")


@pytest.fixture
def sample_prices_path() -> str:
    return str(RAW_DIR / "sample_prices.csv")


@pytest.fixture
def synthetic_shiller_path() -> str:
    return str(RAW_DIR / "shiller_synthetic.csv")


@pytest.fixture
def narrow_window() -> BoundWindow:
    return BoundWindow(math.log(0.9), math.log(1.1))


@pytest.fixture
def wide_window() -> BoundWindow:
    return BoundWindow(math.log(0.8), math.log(1.2))


@pytest.fixture
def write_prices(tmp_path):
    """Write a date,adjusted_close file from (date, close) pairs or raw lines."""
    def _write(rows, name="prices.csv", header="date,adjusted_close"):
        lines = [header]
        for row in rows:
            lines.append(row if isinstance(row, str) else f"{row[0]},{row[1]}")
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return str(path)
    return _write
