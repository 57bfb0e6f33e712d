"""A content-addressed on-disk cache for solved mode fields.
"""

import hashlib
import json
import os
from logging import Logger
from pathlib import Path
from ringtrap.constants import CACHE_DIR_ENV, DEFAULT_CACHE_DIR_NAME
from ringtrap.models.fields import ModeField
from ringtrap.services.artifacts import atomic_write_text, read_mode_field, write_mode_field
from typing import Any, Dict, List, Optional


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def content_key(inputs: Dict[str, Any]) -> str:
    """SHA-256 over the canonical JSON of the solve inputs.
    """
    return hashlib.sha256(canonical_json(inputs).encode("utf-8")).hexdigest()


def resolve_cache_dir(out_dir: str) -> Path:
    """Cache directory: `RINGTRAP_CACHE_DIR` if set, else beside the
    output directory.
    """
    override = os.getenv(CACHE_DIR_ENV)
    if override:
        return Path(override)
    return Path(out_dir).resolve().parent / DEFAULT_CACHE_DIR_NAME


class ModeCache:
    """Stores lists of solved modes under a content-hash key.
    """

    def __init__(self, cache_dir: Path, logger: Optional[Logger] = None) -> None:
        """Initializes a new instance of a `ModeCache`.

        Args:
            cache_dir (`Path`): Root directory of the cache.

            logger (`Logger`): Optional logger.

        Returns:
            None
        """
        self._dir = Path(cache_dir)
        self._logger = logger


    def _entry_dir(self, key: str) -> Path:
        return self._dir / key[:2] / key


    def get(self, inputs: Dict[str, Any]) -> Optional[List[ModeField]]:
        """Loads cached modes for the inputs, or None on a miss.
        """
        entry = self._entry_dir(content_key(inputs))
        index_fpath = entry / "index.json"
        if not index_fpath.exists():
            return None
        try:
            with open(index_fpath, "r", encoding="utf-8") as f:
                names = json.load(f)["modes"]
            modes = [read_mode_field(entry / name) for name in names]
        except (OSError, KeyError, ValueError) as e:
            if self._logger:
                self._logger.warning(f"Ignoring unreadable cache entry {entry.name}. {e}")
            return None
        if self._logger:
            self._logger.debug(f"Cache hit {entry.name[:12]}.")
        return modes


    def put(self, inputs: Dict[str, Any], modes: List[ModeField]) -> None:
        """Writes modes under the inputs' key. The index file is
        replaced last, so readers never see a partial entry.
        """
        key = content_key(inputs)
        entry = self._entry_dir(key)
        entry.mkdir(parents=True, exist_ok=True)
        names = []
        for i, mode in enumerate(modes):
            name = f"mode_{i}"
            write_mode_field(mode, entry / name)
            names.append(name)
        atomic_write_text(
            entry / "index.json",
            canonical_json({"inputs": inputs, "modes": names}))
        if self._logger:
            self._logger.debug(f"Cached {len(modes)} mode(s) under {key[:12]}.")

