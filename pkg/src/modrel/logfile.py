"""Tab-separated test logs: a `from	to	count` header, then one record per line."""

import csv
import logging
from pathlib import Path
from typing import Sequence

from modrel.errors import LogFileError, UnknownModule
from modrel.estimation import FAILURE, SUCCESS, TestLog

logger = logging.getLogger(__name__)

HEADER = ("from", "to", "count")
HEADER_LINE = "\t".join(HEADER)


def _parse_records(lines: list[str]) -> list[tuple[int, str, str, int]]:
    reader = csv.reader(lines, delimiter="\t")
    header = next(reader, None)
    if header is None or tuple(cell.strip() for cell in header) != HEADER:
        raise LogFileError(f"expected header {HEADER_LINE!r}", "line 1")

    records = []
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise LogFileError(f"expected 3 tab-separated fields, got {len(row)}", f"line {line}")
        source, target, raw_count = (cell.strip() for cell in row)
        try:
            count = int(raw_count)
        except ValueError:
            raise LogFileError(f"count '{raw_count}' is not an integer", f"line {line}") from None
        if count < 0:
            raise LogFileError(f"count {count} is negative", f"line {line}")
        if not source or source in (SUCCESS, FAILURE):
            raise LogFileError(f"'{source}' cannot be the source of a transition", f"line {line}")
        if not target:
            raise LogFileError("empty destination", f"line {line}")
        records.append((line, source, target, count))
    return records


def parse_log(text: str, module_names: Sequence[str] | None = None) -> TestLog:
    """
    Parse log text. Without `module_names` the modules are taken in order of
    first appearance, so the source of the first record is the control module.
    """
    records = _parse_records(text.splitlines())

    if module_names is None:
        names: list[str] = []
        for _, source, target, _ in records:
            for name in (source, target):
                if name not in (SUCCESS, FAILURE) and name not in names:
                    names.append(name)
        module_names = names
    else:
        known = set(module_names)
        for line, source, target, _ in records:
            for name in (source, target):
                if name not in (SUCCESS, FAILURE) and name not in known:
                    raise LogFileError(f"unknown module '{name}'", f"line {line}")

    try:
        return TestLog.from_records(module_names, ((s, t, c) for _, s, t, c in records))
    except UnknownModule as e:
        raise LogFileError(str(e)) from None


def read_log(path: str | Path, module_names: Sequence[str] | None = None) -> TestLog:
    path = Path(path)
    logger.info(f"Loading test log from {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise LogFileError(f"not valid UTF-8: {e.reason}", f"{path} byte {e.start}") from None
    log = parse_log(text, module_names)
    logger.info(f"Loaded {log.total} observations over {log.size} modules")
    return log


def write_log(log: TestLog, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records = log.records()
    path.write_text(
        HEADER_LINE + "\n" + "".join(f"{source}\t{target}\t{count}\n" for source, target, count in records),
        encoding="utf-8",
    )
    logger.info(f"Wrote {len(records)} log records to {path}")
