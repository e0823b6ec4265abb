import hashlib
import json
import sys
import threading
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Literal


def scenario_digest(payload: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a scenario."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class AuditLogger:
    """Appends one JSON line per CLI or HTTP run with thread-safe file operations."""

    _lock = threading.Lock()

    def __init__(self, path: str | Path = "logs/audit.log", enabled: bool = True) -> None:
        """Create the log directory up front; a disabled logger touches nothing."""
        self.enabled = enabled
        self.log_file = Path(path)
        if enabled:
            try:
                self.log_file.parent.mkdir(parents=True, exist_ok=True)
            except OSError as e:
                print(f"Audit log directory unavailable: {e}", file=sys.stderr)

    def log_run(
        self,
        command: str,
        scenario: Dict[str, Any],
        summary: Dict[str, Any],
        status: Literal["OK", "INVALID", "FAILED"],
    ) -> None:
        """Record one run.

        Args:
            command: Subcommand or HTTP route that was executed
            scenario: Inputs of the run, stored as a digest only
            summary: Verdict or headline numbers of the result
            status: OK, INVALID (bad input) or FAILED (numerical failure)
        """
        if not self.enabled:
            return
        log_data = {
            "timestamp": datetime.now().isoformat(),
            "command": command,
            "scenario_digest": scenario_digest(scenario),
            "summary": summary,
            "status": status,
        }

        with self._lock:
            try:
                with self.log_file.open("a", encoding="utf-8") as f:
                    f.write(json.dumps(log_data, sort_keys=True, default=str) + "\n")
            except OSError as e:
                print(f"Audit log write failed: {e}", file=sys.stderr)
