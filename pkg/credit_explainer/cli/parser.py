import argparse

from credit_explainer.classifiers.schemas import ModelKind
from credit_explainer.errors import UsageError
from credit_explainer.settings import config

MODEL_CHOICES = [kind.value for kind in ModelKind]


class CliParser(argparse.ArgumentParser):
    """Raises `UsageError` instead of exiting, so usage mistakes get an error record like any other failure."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}", detail=self.format_usage().strip())


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # subcommands repeat the global flags with suppressed defaults so either position works
    default = (lambda value: argparse.SUPPRESS) if suppress else (lambda value: value)
    parser.add_argument("--root", default=default(config.artifact_root), help="artifact root (env ARTIFACT_ROOT)")
    parser.add_argument("--config", default=default(None), help="run configuration JSON with flat dotted keys")
    parser.add_argument("--jobs", type=int, default=default(None), help="parallel workers for fan-out")
    parser.add_argument("--seed", type=int, default=default(None), help="master seed")
    parser.add_argument("--log-level", default=default(config.log_level), help="logging level")


def _kind(parser: argparse.ArgumentParser, allow_all: bool = False) -> None:
    choices = MODEL_CHOICES + (["all"] if allow_all else [])
    parser.add_argument("--kind", choices=choices, default="boosted", help="model family")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog="credit-explainer",
        description="Train credit-default classifiers and explain them with LIME, SHAP and ALE",
    )
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", parents=[common], help="generate a synthetic loan CSV")
    synth.add_argument("--rows", type=int, default=5000)
    synth.add_argument("--out", required=True, help="CSV path; truth and schema JSON are written beside it")

    prep = commands.add_parser("prep", parents=[common], help="preprocess, encode and split a loan CSV")
    prep.add_argument("--in", dest="input", required=True)
    prep.add_argument("--schema", default=config.schema_conf)
    prep.add_argument("--out", default=None, help="encoded directory (default <root>/encoded)")
    prep.add_argument("--sparse-threshold", type=float, default=None)
    prep.add_argument("--r-max", type=float, default=None)
    prep.add_argument("--alpha", type=float, default=None)
    prep.add_argument("--test-fraction", type=float, default=None)

    train = commands.add_parser("train", parents=[common], help="train one or all model kinds")
    _kind(train, allow_all=True)

    evaluate = commands.add_parser("eval", parents=[common], help="score a trained model on the test split")
    _kind(evaluate, allow_all=True)
    evaluate.add_argument("--threshold", type=float, default=0.5)

    explain = commands.add_parser("explain", parents=[common], help="local explanations")
    methods = explain.add_subparsers(dest="method", required=True)

    lime = methods.add_parser("lime", parents=[common])
    _kind(lime)
    lime.add_argument("--instance", type=int, nargs="+", default=[0], help="test-row indices")
    lime.add_argument("--k", type=int, default=None, help="features per explanation")
    lime.add_argument("--n-samples", type=int, default=None)
    lime.add_argument("--kernel-width", type=float, default=None)
    lime.add_argument("--discretizer", choices=["quartile", "none"], default=None)
    lime.add_argument("--ridge-alpha", type=float, default=None)

    shap = methods.add_parser("shap", parents=[common])
    _kind(shap)
    shap.add_argument("--n", type=int, default=None, help="test rows to explain")
    shap.add_argument("--coalitions", default=None, help="sampled coalitions per row, or 'exhaustive'")
    shap.add_argument("--background", choices=["kmeans", "sample", "full"], default=None)
    shap.add_argument("--background-k", type=int, default=None)

    exact = methods.add_parser("exact", parents=[common])
    _kind(exact)
    exact.add_argument("--n", type=int, default=10)
    exact.add_argument("--background-k", type=int, default=None)

    ale = commands.add_parser("ale", parents=[common], help="accumulated local effects curves")
    _kind(ale)
    ale.add_argument("--features", nargs="+", default=None, help="encoded feature names")
    ale.add_argument("--intervals", type=int, default=None)
    ale.add_argument("--link", choices=["identity", "logit"], default=None)

    report = commands.add_parser("report", parents=[common], help="plot-ready exports of a SHAP matrix")
    views = report.add_subparsers(dest="view", required=True)
    for name in ("summary", "dependence", "force", "compare"):
        view = views.add_parser(name, parents=[common])
        _kind(view)
        view.add_argument("--explainer", default="shap", choices=["shap", "exact"])
        view.add_argument("--top-n", type=int, default=None)
        if name in ("dependence", "force"):
            view.add_argument("--feature", default=None, help="encoded feature name")

    bench = commands.add_parser("bench", parents=[common], help="acceptance experiments")
    experiments = bench.add_subparsers(dest="experiment", required=True)

    consistency = experiments.add_parser("consistency", parents=[common], help="top-20 stability, 100 vs 2000 rows")
    _kind(consistency)
    consistency.add_argument("--small", type=int, default=100)
    consistency.add_argument("--large", type=int, default=2000)
    consistency.add_argument("--top-n", type=int, default=20)

    background = experiments.add_parser("background", parents=[common], help="k-means vs raw background")
    _kind(background)
    background.add_argument("--instances", type=int, default=50)
    background.add_argument("--background-k", type=int, default=30)
    background.add_argument("--raw", type=int, default=1000)
    background.add_argument("--top-n", type=int, default=10)
    return parser
