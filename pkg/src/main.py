from typing import List, Optional
from dotenv import load_dotenv

load_dotenv()

import argparse
import logging
import sys
from pathlib import Path

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.__version__ import version
from src.lab.cli.experiment_config import load_experiment_config
from src.lab.cli.runner import ExperimentRunner
from src.lab.config import get_lab_settings
from src.lab.enums import ExitCode, Scenario
from src.lab.exceptions import LabException
from src.lab.maps import ExitCodeMap

logger = logging.getLogger("logger")


def configure_logging() -> None:
    try:
        level = get_lab_settings().log_level
    except LabException:
        level = "INFO"
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[logging.StreamHandler(sys.stdout)]
    )


class ArgumentParserFactory:
    """Builds the `nnlif-lab <scenario> --config <path>` parser"""

    @staticmethod
    def create() -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog="nnlif-lab", description="Numerical experiments for the delayed NNLIF equation"
        )
        parser.add_argument("scenario", choices=Scenario.get_values(), help="experiment to run")
        parser.add_argument("--config", required=True, type=Path, help="INI experiment configuration")
        parser.add_argument("--out", type=Path, default=None, help="output directory (overrides [output])")
        parser.add_argument("--seed", type=int, default=None, help="random seed (overrides [scenario] seed)")
        parser.add_argument("--version", action="version", version=f"%(prog)s {version}")
        return parser


class LabApplication:
    """Loads the configuration and runs it; every failure becomes an exit code"""

    def __init__(self, runner: Optional[ExperimentRunner] = None):
        self._runner = runner if runner is not None else ExperimentRunner()

    def execute(self, args: argparse.Namespace) -> int:
        try:
            config = load_experiment_config(args.config, Scenario.parse(args.scenario), args.out, args.seed)
        except LabException as exc:
            logger.error(exc.get_log_message())
            return ExitCodeMap.for_exception(exc).value
        return self._runner.run(config)


class LabLauncher:
    @staticmethod
    def launch(argv: Optional[List[str]] = None) -> int:
        args = ArgumentParserFactory.create().parse_args(argv)
        logger.info(f"nnlif-lab {version}: {args.scenario} with {args.config}")
        return LabApplication().execute(args)


def main(argv: Optional[List[str]] = None) -> None:
    """Console entry point"""
    configure_logging()
    try:
        code = LabLauncher.launch(argv)
    except SystemExit as exc:
        # argparse usage errors are validation failures
        code = ExitCode.VALIDATION.value if exc.code not in (0, None) else 0
    sys.exit(code)


if __name__ == "__main__":
    main()
