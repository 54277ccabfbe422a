#!/usr/bin/env python3
"""
Suite Processor
Discovers experiment configs in a directory and runs them through a bounded
thread pipeline, one ExperimentService call per file.

The pool width comes from SPLITKIT_THREADS (read through python-dotenv).
Each experiment writes only to its own output directory, so completion order
never changes any artifact.
"""

import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dotenv import load_dotenv

from tools.errors import ConfigError
from service.experiment_service import EXIT_OK, ExperimentResult, ExperimentService

logger = logging.getLogger(__name__)

THREADS_ENV = "SPLITKIT_THREADS"


def threads_from_env(default: int = 1) -> int:
    """
    Pool width from SPLITKIT_THREADS

    Raises:
        ConfigError: When the variable is set but is not a positive integer
    """
    load_dotenv()
    raw = os.getenv(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer", [f"{THREADS_ENV}: expected integer"]) from e
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be positive, got {value}", [f"{THREADS_ENV}: must be >= 1"])
    return value


class SuiteProcessor:
    def __init__(self, input_dir: Union[str, Path], output_root: Union[str, Path] = "output",
                 max_concurrent: Optional[int] = None, seed_override: Optional[int] = None):
        """
        Initialize the suite processor

        Args:
            input_dir: Directory holding *.json experiment configs
            output_root: Parent of the per-experiment output directories
            max_concurrent: Pipeline width; defaults to SPLITKIT_THREADS or 1
            seed_override: Forwarded to ExperimentService
        """
        self.input_dir = Path(input_dir)
        self.output_root = Path(output_root)
        self.max_concurrent = max_concurrent if max_concurrent is not None else threads_from_env()
        self.service = ExperimentService(self.output_root, seed_override)

        self.total_files = 0
        self.completed_files = 0
        self._progress_lock = threading.Lock()

    def discover_files(self) -> List[Path]:
        """Sorted list of config files in the input directory"""
        if not self.input_dir.is_dir():
            raise ConfigError(f"Suite directory does not exist: {self.input_dir}",
                              [f"{self.input_dir}: not a directory"])
        files = sorted(p for p in self.input_dir.iterdir() if p.is_file() and p.suffix.lower() == ".json")
        logger.info(f"📁 Discovered {len(files)} experiment configs")
        return files

    def process_file(self, file_path: Path, index: int, total: int) -> Dict[str, Any]:
        logger.info(f"[{index}/{total}] Processing: {file_path.name}")
        result: ExperimentResult = self.service.run_path(file_path)
        with self._progress_lock:
            self.completed_files += 1
            completed = self.completed_files
        if result.success:
            logger.info(f"Progress: [{completed}/{self.total_files}]")
        else:
            logger.error(f"❌ Experiment failed: {file_path.name} (exit {result.exit_code}) - {result.error}")
        return {
            "file": file_path.name,
            "name": result.name,
            "success": result.success,
            "exit_code": result.exit_code,
            "error": result.error,
            "csv_path": result.csv_path,
            "summary_path": result.summary_path,
        }

    def process_with_pipeline(self, files: List[Path]) -> List[Dict[str, Any]]:
        """
        Run every config keeping at most max_concurrent experiments active

        Returns:
            One entry per file, in file order
        """
        if not files:
            return []
        total = len(files)
        self.total_files = total
        self.completed_files = 0
        results: Dict[int, Dict[str, Any]] = {}

        logger.info(f"🚀 Starting pipeline with max {self.max_concurrent} concurrent experiments")
        with ThreadPoolExecutor(max_workers=self.max_concurrent) as executor:
            futures = {executor.submit(self.process_file, path, index, total): (path, index)
                       for index, path in enumerate(files, start=1)}
            for completed in as_completed(futures):
                path, index = futures[completed]
                try:
                    results[index] = completed.result()
                except Exception as e:
                    logger.error(f"❌ Unexpected error processing {path.name}: {e}")
                    results[index] = {"file": path.name, "name": None, "success": False, "exit_code": 1,
                                      "error": str(e), "csv_path": None, "summary_path": None}
        logger.info(f"Pipeline complete: {len(results)} experiments processed")
        return [results[index] for index in sorted(results)]

    def run(self) -> Dict[str, Any]:
        """
        Run the whole suite

        Returns:
            Summary with per-file entries and the worst exit code under "exit_code"
        """
        logger.info(f"🚀 Starting suite in {self.input_dir}")
        logger.info(f"📤 Output root: {self.output_root}")
        files = self.discover_files()
        if not files:
            logger.warning("⚠️  No experiment configs found")
            return {"total_files": 0, "processed": [], "summary": {"success": 0, "failed": 0},
                    "exit_code": EXIT_OK}

        processed = self.process_with_pipeline(files)
        success_count = sum(1 for entry in processed if entry["success"])
        worst = max((entry["exit_code"] for entry in processed), default=EXIT_OK)
        logger.info(f"Suite complete: {success_count} successful, {len(processed) - success_count} failed")
        return {
            "total_files": len(files),
            "processed": processed,
            "summary": {"success": success_count, "failed": len(processed) - success_count},
            "exit_code": worst,
        }
