import math
from abc import ABC, abstractmethod
from datetime import date
from pathlib import Path
from typing import Any, List, Optional

import pandas as pd

from src.data.market_data import ShillerRecord
from src.models.core_model import PriceSeries
from src.utils.exceptions import DomainError, OrderError, ParseError
from src.utils.logger import app_logger

PRICE_COLUMNS = ["date", "adjusted_close"]
SHILLER_COLUMNS = ["year", "P", "D", "J"]


class BaseDataLoader(ABC):
    @abstractmethod
    def load_data(self, source: str) -> Any:
        pass

    def _read_table(self, source: str, columns: List[str], comment: Optional[str] = None,
                    keep_blank_lines: bool = False) -> pd.DataFrame:
        path = Path(source)
        if not path.exists():
            raise FileNotFoundError(f"Input file not found: {source}")
        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False, comment=comment,
                                skipinitialspace=True, skip_blank_lines=not keep_blank_lines)
        except pd.errors.EmptyDataError:
            raise ParseError("file is empty, expected header " + ",".join(columns))
        except pd.errors.ParserError as e:
            raise ParseError(f"malformed CSV: {e}")

        header = [str(name).strip() for name in frame.columns]
        if header != columns:
            raise ParseError(f"expected header {','.join(columns)}, got {','.join(header)}")
        frame.columns = header
        return frame


class PriceCsvLoader(BaseDataLoader):
    """Reads ``date,adjusted_close`` files; data rows start at line 2.

    Blank lines are skipped but still counted in reported line numbers.
    """

    def load_data(self, source: str) -> PriceSeries:
        frame = self._read_table(source, PRICE_COLUMNS, keep_blank_lines=True)
        dates: List[date] = []
        closes: List[float] = []

        for offset, (raw_date, raw_close) in enumerate(zip(frame["date"], frame["adjusted_close"])):
            line = offset + 2
            if _is_blank(raw_date) and _is_blank(raw_close):
                continue
            try:
                day = date.fromisoformat(str(raw_date).strip())
            except ValueError:
                raise ParseError(f"not an ISO-8601 date: {raw_date!r}", line=line, field="date")
            try:
                close = float(raw_close)
            except ValueError:
                raise ParseError(f"not a decimal number: {raw_close!r}", line=line, field="adjusted_close")
            if not math.isfinite(close):
                raise ParseError(f"price is not finite: {raw_close!r}", line=line, field="adjusted_close")
            if close <= 0:
                raise DomainError(f"line {line}: adjusted close must be positive, got {close}")
            if dates and not day > dates[-1]:
                raise OrderError(f"date {day} does not follow {dates[-1]}", line=line)
            dates.append(day)
            closes.append(close)

        app_logger.info(f"Loaded {len(closes)} closes from {source}")
        return PriceSeries(dates=tuple(dates), closes=closes)


def _is_blank(value: Any) -> bool:
    return pd.isna(value) or not str(value).strip()


class ShillerCsvLoader(BaseDataLoader):
    """Reads ``year,P,D,J`` tables; lines starting with '#' are comments."""

    def load_data(self, source: str) -> List[ShillerRecord]:
        frame = self._read_table(source, SHILLER_COLUMNS, comment="#")
        records = []
        for offset, row in enumerate(frame.itertuples(index=False)):
            values = {}
            for name in SHILLER_COLUMNS:
                raw = getattr(row, name)
                try:
                    values[name] = int(raw) if name == "year" else float(raw)
                except ValueError:
                    raise ParseError(f"record {offset + 1}: cannot parse {raw!r}", field=name)
            records.append(ShillerRecord(**values))

        app_logger.info(f"Loaded {len(records)} annual records from {source}")
        return records


def load_price_csv(path: str) -> PriceSeries:
    return PriceCsvLoader().load_data(path)


def load_shiller_csv(path: str) -> List[ShillerRecord]:
    return ShillerCsvLoader().load_data(path)
