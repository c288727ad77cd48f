from credit_explainer.cli.commands import run_command
from credit_explainer.cli.parser import build_parser
from credit_explainer.cli.run_config import RunConfig

__all__ = ["RunConfig", "build_parser", "run_command"]
