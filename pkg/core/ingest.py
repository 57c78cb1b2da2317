"""
Ingest Module

Reads angle columns from CSV/plain-text files into AngleSample objects.
"""

from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from loguru import logger

from .angles import AngleSample, AngleUnit
from .exceptions import DataFormatError

ColumnRef = Optional[Union[str, int]]


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _is_name(cell: str) -> bool:
    """Header cells start with a letter or underscore; anything else is a data value."""
    return not _is_number(cell) and (cell[:1].isalpha() or cell[:1] == "_")


def _resolve_column(header: pd.Series, column: ColumnRef, has_header: bool, path: Path) -> int:
    if column is None:
        return 0
    if isinstance(column, int) or (isinstance(column, str) and column.strip().isdigit()):
        index = int(column)
        if index >= header.size:
            raise DataFormatError(f"{path}: column index {index} out of range ({header.size} columns)")
        return index
    names = [str(cell).strip() for cell in header]
    if not has_header or column not in names:
        raise DataFormatError(f"{path}: unknown column {column!r}")
    return names.index(column)


def parse_angles(path: Union[str, Path], unit: Union[AngleUnit, str] = AngleUnit.RADIANS,
                 column: ColumnRef = None) -> AngleSample:
    """
    Read one column of angles from a delimited text file.

    The first row is a header when its selected cell looks like a name
    (starts with a letter or underscore and is not a number, so 'nan' and
    'inf' are data). Malformed values such as '1.2.3' or '-' in the first row
    are data and fail with their line number. Blank lines are skipped.

    Args:
        path: File path
        unit: Unit of the values ('rad', 'deg' or 'hour24')
        column: Column name (requires a header) or zero-based index

    Returns:
        AngleSample in radians, reduced to [0, 2*pi)

    Raises:
        DataFormatError: for missing/empty files, unknown columns, or
            rows that are not finite numbers (reported with line numbers)
    """
    path = Path(path)
    unit = AngleUnit(unit)
    if not path.is_file():
        raise DataFormatError(f"Angle file not found: {path}")

    try:
        frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False,
                            skip_blank_lines=False, skipinitialspace=True)
    except pd.errors.EmptyDataError as exc:
        raise DataFormatError(f"{path} is empty") from exc
    except pd.errors.ParserError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc

    frame.index = np.arange(1, len(frame) + 1)
    blank = frame.apply(lambda row: all(str(cell).strip() == "" for cell in row), axis=1)
    frame = frame[~blank]
    if frame.empty:
        raise DataFormatError(f"{path} contains no data rows")

    first = frame.iloc[0]
    selected = 0
    if column is not None and (isinstance(column, int) or str(column).strip().isdigit()):
        selected = min(int(column), first.size - 1)
    head = str(first.iloc[selected]).strip()
    has_header = _is_name(head)
    if has_header:
        logger.info(f"{path}: treating line {first.name} ({head!r}) as a header")
    index = _resolve_column(first, column, has_header, path)
    if has_header:
        frame = frame.iloc[1:]
    if frame.empty:
        raise DataFormatError(f"{path} contains a header but no data rows")

    cells = frame.iloc[:, index].astype(str).str.strip()
    values = pd.to_numeric(cells, errors="coerce")
    invalid = ~np.isfinite(values.to_numpy(dtype=float))
    if invalid.any():
        line = int(cells.index[np.argmax(invalid)])
        bad = cells[line]
        raise DataFormatError(f"{path}:{line}: cannot parse {bad!r} as a finite number")

    sample = AngleSample.from_values(values.to_numpy(dtype=float), unit, source=str(path))
    logger.info(f"Read {sample.n} angles ({unit.value}) from {path}")
    return sample
