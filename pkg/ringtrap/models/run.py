"""Models used to track and document a command run.
"""

import json
from datetime import datetime, timezone
from ringtrap import __version__
from ringtrap.constants import (
    COMPLETED_STATUS,
    ERROR_STATUS,
    IN_PROGRESS_STATUS,
    NOT_STARTED_STATUS
)
from typing import Dict, List, Optional


class RunProvenance:
    """Represents the status and provenance of one command run.
    """

    def __init__(
        self,
        command: str,
        config_hash: str,
        config: Dict) -> None:
        """Initializes a new instance of a `RunProvenance`.

        Args:
            command (str): The subcommand being run (e.g., "modes").

            config_hash (str): SHA-256 hex digest of the original
                configuration text.

            config (dict): The complete, unit-normalized configuration
                with defaults filled in.

        Returns:
            None
        """
        self.command = command
        self.config_hash = config_hash
        self.config = config
        self.version: str = __version__
        self.status: str = NOT_STARTED_STATUS
        self.processing_start_utc: Optional[datetime] = None
        self.processing_end_utc: Optional[datetime] = None
        self.last_failed_at_utc: Optional[datetime] = None
        self.last_error_message: Optional[str] = None
        self.artifacts: List[str] = []


    def start(self) -> None:
        """Marks the run as in progress.
        """
        self.status = IN_PROGRESS_STATUS
        self.processing_start_utc = datetime.now(timezone.utc)


    def complete(self) -> None:
        """Marks the run as successfully completed.
        """
        self.status = COMPLETED_STATUS
        self.processing_end_utc = datetime.now(timezone.utc)


    def fail(self, error: Exception) -> None:
        """Records a failure.

        Args:
            error (`Exception`): The exception that ended the run.

        Returns:
            None
        """
        self.status = ERROR_STATUS
        self.last_failed_at_utc = datetime.now(timezone.utc)
        self.last_error_message = str(error)


    def header(self) -> Dict:
        """The provenance block written into every artifact. Carries no
        timestamps.
        """
        return {
            "command": self.command,
            "config_sha256": self.config_hash,
            "toolkit_version": self.version,
            "config": self.config,
        }


    def header_line(self) -> str:
        return json.dumps(self.header(), sort_keys=True, separators=(",", ":"))


    def summary(self) -> Dict:
        """Status record written beside the artifacts at the end of a run.
        """
        def stamp(value: Optional[datetime]) -> Optional[str]:
            return None if value is None else value.isoformat()

        return {
            **self.header(),
            "status": self.status,
            "processing_start_utc": stamp(self.processing_start_utc),
            "processing_end_utc": stamp(self.processing_end_utc),
            "last_failed_at_utc": stamp(self.last_failed_at_utc),
            "last_error_message": self.last_error_message,
            "artifacts": sorted(self.artifacts),
        }
