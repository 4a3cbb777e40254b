"""
tools/files.py
Write-once output files: data goes to a temp file beside the target and is
renamed over it only when complete.
"""

import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, Union

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


def _stage(target: Path, data: bytes) -> str:
    """Temp file next to `target` holding `data`; OSErrors name the target."""
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent or ".")
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise OSError(exc.errno, exc.strerror, str(target)) from exc
    return tmp


def atomic_write_all(outputs: Iterable[tuple]):
    """
    Write every (path, data) pair. All files are staged first; none is
    renamed into place unless every one of them was written.
    """
    staged = []
    try:
        for path, data in outputs:
            if isinstance(data, str):
                data = data.encode("utf-8")
            target = Path(path)
            staged.append((_stage(target, data), target, len(data)))
        for tmp, target, _ in staged:
            os.replace(tmp, target)
    except BaseException:
        for tmp, _, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise
    for _, target, size in staged:
        logger.info("wrote %s (%d bytes)", target, size)


def atomic_write(path: PathLike, data: Union[bytes, str]):
    """Write `data` to `path` so readers see either the old file or the whole new one."""
    atomic_write_all([(path, data)])
