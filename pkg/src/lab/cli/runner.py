from __future__ import annotations
from pathlib import Path
from typing import List, Optional, Tuple
import logging

import numpy as np

from ..config import LabSettings, get_lab_settings
from ..enums import ExitCode, SummaryKey
from ..exceptions import LabException
from ..helpers.logging_utils import LoggingFormatter
from ..helpers.parallel import SweepExecutorFactory
from ..maps import ExitCodeMap
from .experiment_config import ExperimentConfig
from .scenarios import ScenarioRunnerMap
from .writers import OutputWriter, format_value


class ExperimentRunner:
    """Runs one config (or every point of its sweep) and writes the artifacts of successful runs"""

    def __init__(self, writer: Optional[OutputWriter] = None, settings: Optional[LabSettings] = None):
        self._writer = writer if writer is not None else OutputWriter()
        self._settings = settings
        self._logger = logging.getLogger(self.__class__.__name__)

    def run(self, config: ExperimentConfig) -> int:
        if config.sweep is None:
            return self._run_single(config, config.output_dir)
        sweep = config.sweep
        points: List[Tuple[ExperimentConfig, Path]] = [
            (config.with_parameter(sweep.parameter, value),
             config.output_dir / f"{sweep.parameter}={format_value(value)}")
            for value in sweep.values
        ]
        settings = self._settings if self._settings is not None else get_lab_settings()
        executor = SweepExecutorFactory.create(len(points), settings.threads)
        self._logger.info(
            f"sweep over {sweep.parameter} with {len(points)} value(s), {settings.threads} thread(s)"
        )
        codes = executor.execute(lambda point: self._run_single(*point), points)
        return max(codes)

    def _run_single(self, config: ExperimentConfig, directory: Path) -> int:
        self._logger.info(f"running {config.scenario.value} {LoggingFormatter.format(config.params.to_dict())}")
        try:
            outcome = ScenarioRunnerMap.create(config.scenario).run(config)
        except LabException as exc:
            code = ExitCodeMap.for_exception(exc)
            self._logger.error(f"{config.scenario.value} failed: {exc.get_log_message()}")
            return code.value
        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            self._logger.error(f"{config.scenario.value} failed: {type(exc).__name__}: {exc}")
            return ExitCode.NUMERIC.value

        outcome.summary.update({
            SummaryKey.SCENARIO: config.scenario,
            SummaryKey.EXIT_CODE: outcome.exit_code,
            SummaryKey.SEED: config.seed,
            SummaryKey.N_CELLS: config.grid.n_cells,
            SummaryKey.DT: config.time.dt,
        })
        self._writer.write(directory, outcome, config.to_dict())
        self._logger.info(f"summary {LoggingFormatter.format({k.value: v for k, v in outcome.summary.items()})}")
        return outcome.exit_code


def run(config: ExperimentConfig) -> int:
    """Execute the configured scenario and return the process exit code"""
    return ExperimentRunner().run(config)
