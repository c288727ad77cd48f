import json
import logging
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterator

import numpy as np
import pandas as pd
from pydantic import BaseModel

from credit_explainer.classifiers import (
    ProbabilityModel,
    evaluate,
    information_gain_importance,
    model_from_document,
    train_boosted,
    train_forest,
    train_logistic,
    train_mlp,
    train_svm_linear,
)
from credit_explainer.classifiers.schemas import ModelKind
from credit_explainer.cli.manifest import Manifest, hash_paths, manifest_store, package_versions
from credit_explainer.cli.parser import build_parser
from credit_explainer.cli.run_config import RunConfig
from credit_explainer.dataset import (
    EncodedMatrix,
    Encoder,
    PreprocessReport,
    SplitSpec,
    fit_encoder,
    generate_synthetic,
    load_csv,
    load_schema,
    run_preprocessing,
    train_test_split,
    write_synthetic,
)
from credit_explainer.errors import CreditExplainerError, MissingArtifactError, UsageError
from credit_explainer.explainers import (
    Background,
    ShapConfig,
    ShapMatrix,
    ale_curves,
    exact_shapley,
    explain_batch,
    fit_discretizer,
    full_background,
    refinement_check,
    render_table,
    sample_background,
    shap_matrix,
    summarize_background,
)
from credit_explainer.reports import ByFeature, ByOutput, dependence_data, force_data, importance_compare, summary_data, write_view
from credit_explainer.reports.bench import background_experiment, consistency_experiment
from credit_explainer.settings import config
from credit_explainer.store import ArtifactCRUD, TableCRUD
from credit_explainer.store.crud_helper import (
    AleReport,
    ArtifactStores,
    EncoderCRUD,
    ExplanationBatch,
    PreprocessCRUD,
    ShapDocument,
    artifact_stores,
)

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


class ErrorRecord(BaseModel):
    error: str
    code: str
    detail: str | None = None
    command: str


@dataclass
class CommandContext:
    args: object
    run: RunConfig
    stores: ArtifactStores
    inputs: list[Path] = field(default_factory=list)
    outputs: list[Path] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    @contextmanager
    def timed(self, stage: str) -> Iterator[None]:
        started = time.perf_counter()
        yield
        self.timings[stage] = time.perf_counter() - started


# --- artifact access ---
def _load_split(ctx: CommandContext, name: str) -> EncodedMatrix:
    frame = ctx.stores.encoded.get_resource(name)
    if frame is None:
        raise MissingArtifactError(f"no {name} split under {ctx.stores.root}; run `prep` first", detail=name)
    ctx.inputs.append(ctx.stores.encoded.path_for(name))
    return EncodedMatrix.from_frame(frame)


def _load_model(ctx: CommandContext, kind: ModelKind) -> ProbabilityModel:
    document = ctx.stores.models.get_resource(kind.value)
    if document is None:
        raise MissingArtifactError(f"no trained {kind.value} model; run `train --kind {kind.value}` first", detail=kind.value)
    ctx.inputs.append(ctx.stores.models.path_for(kind.value))
    return model_from_document(document)


def _load_shap(ctx: CommandContext, kind: str, explainer: str) -> ShapMatrix:
    stem = f"{kind}_{explainer}"
    phi, values = ctx.stores.shap_tables.get_resource(stem), ctx.stores.shap_tables.get_resource(f"{stem}_values")
    if phi is None or values is None:
        raise MissingArtifactError(f"no {explainer} attributions for {kind}; run `explain {explainer}` first", detail=stem)
    ctx.inputs.extend([ctx.stores.shap_tables.path_for(stem), ctx.stores.shap_tables.path_for(f"{stem}_values")])
    return ShapMatrix.from_frames(phi, values)


def _write_shap(ctx: CommandContext, kind: str, explainer: str, sm: ShapMatrix) -> None:
    stem = f"{kind}_{explainer}"
    ctx.outputs.append(ctx.stores.shap_tables.create_resource(stem, sm.to_frame()))
    ctx.outputs.append(ctx.stores.shap_tables.create_resource(f"{stem}_values", sm.values_frame()))
    document = ShapDocument(
        model=kind,
        explainer=explainer,
        feature_names=sm.feature_names,
        phi=sm.phi.tolist(),
        base_values=sm.base_values.tolist(),
        fx=sm.fx.tolist(),
        values=sm.X.tolist(),
    )
    ctx.stores.shap_documents.create_resource(stem, document)
    ctx.outputs.append(ctx.stores.shap_documents.path_for(stem))
    residual = float(np.abs(sm.base_values + sm.phi.sum(axis=1) - sm.fx).max()) if sm.n_rows else 0.0
    logger.info(f"✅ {sm.n_rows} {explainer} rows for {kind}; max local-accuracy residual {residual:.2e}")


def _kinds(kind: str) -> list[ModelKind]:
    return list(ModelKind) if kind == "all" else [ModelKind(kind)]


def _feature_index(names: list[str], feature: str) -> int:
    if feature not in names:
        raise ValueError(f"unknown feature {feature!r}; encoded features are {names}")
    return names.index(feature)


def _train(kind: ModelKind, m: EncodedMatrix, run: RunConfig) -> ProbabilityModel:
    s = run.models
    if kind == ModelKind.LOGISTIC:
        return train_logistic(m.X, m.y, l2=s.logistic.l2, seed=run.seed, feature_names=m.names)
    if kind == ModelKind.FOREST:
        return train_forest(
            m.X,
            m.y,
            n_trees=s.forest.n_trees,
            max_depth=s.forest.max_depth,
            seed=run.seed,
            max_features=s.forest.max_features,
            bootstrap=s.forest.bootstrap,
            jobs=run.jobs,
            feature_names=m.names,
        )
    if kind == ModelKind.BOOSTED:
        return train_boosted(
            m.X,
            m.y,
            n_rounds=s.boosted.n_rounds,
            max_depth=s.boosted.max_depth,
            learning_rate=s.boosted.learning_rate,
            seed=run.seed,
            feature_names=m.names,
        )
    if kind == ModelKind.SVM_LINEAR:
        return train_svm_linear(
            m.X,
            m.y,
            c=s.svm_linear.c,
            seed=run.seed,
            epochs=s.svm_linear.epochs,
            calibration_fraction=s.svm_linear.calibration_fraction,
            probability_method=s.svm_linear.probability_method,
            feature_names=m.names,
        )
    return train_mlp(
        m.X,
        m.y,
        layers=s.mlp.layers,
        seed=run.seed,
        epochs=s.mlp.epochs,
        batch_size=s.mlp.batch_size,
        learning_rate=s.mlp.learning_rate,
        init=s.mlp.init,
        feature_names=m.names,
    )


def _shap_config(ctx: CommandContext, **overrides) -> ShapConfig:
    updates = {k: v for k, v in overrides.items() if v is not None}
    return ctx.run.shap.model_copy(update={**updates, "seed": ctx.run.seed})


def _background(X_train: np.ndarray, cfg: ShapConfig) -> Background:
    if cfg.background == "full":
        return full_background(X_train)
    if cfg.background == "sample":
        return sample_background(X_train, cfg.background_k, seed=cfg.seed)
    return summarize_background(X_train, k=cfg.background_k, source_n=cfg.source_n, seed=cfg.seed)


# --- commands ---
def cmd_synth(ctx: CommandContext) -> None:
    args = ctx.args
    with ctx.timed("generate"):
        dataset, truth = generate_synthetic(args.rows, ctx.run.seed)
        paths = write_synthetic(dataset, truth, args.out)
    ctx.outputs.extend(paths.values())


def cmd_prep(ctx: CommandContext) -> None:
    args = ctx.args
    prep = ctx.run.prep
    stores = ctx.stores if args.out is None else _with_encoded_dir(ctx.stores, Path(args.out))

    ctx.inputs.extend([Path(args.input), Path(args.schema)])
    with ctx.timed("load"):
        dataset = load_csv(args.input, load_schema(args.schema))
    with ctx.timed("preprocess"):
        processed = run_preprocessing(dataset, prep.sparse_threshold, prep.r_max, prep.alpha)
        encoder = fit_encoder(processed)
        encoded = encoder.transform(processed)
        train, test = train_test_split(encoded, SplitSpec(test_fraction=prep.test_fraction, seed=ctx.run.seed))

    report = PreprocessReport(
        steps=list(processed.history),
        encoder_map=encoder.to_map(),
        n_rows=encoded.n_rows,
        n_features=len(encoded.names),
    )
    ctx.outputs.append(stores.encoded.create_resource("train", train.to_frame()))
    ctx.outputs.append(stores.encoded.create_resource("test", test.to_frame()))
    stores.encoders.create_resource("encoder", encoder)
    stores.preprocess.create_resource("preprocess", report)
    ctx.outputs.extend([stores.encoders.path_for("encoder"), stores.preprocess.path_for("preprocess")])


def _with_encoded_dir(stores: ArtifactStores, directory: Path) -> ArtifactStores:
    return replace(
        stores,
        encoded=TableCRUD(directory),
        encoders=EncoderCRUD(Encoder, directory),
        preprocess=PreprocessCRUD(PreprocessReport, directory),
    )


def cmd_train(ctx: CommandContext) -> None:
    train = _load_split(ctx, "train")
    for kind in _kinds(ctx.args.kind):
        logger.info(f"🏋️ Training {kind.value} on {train.n_rows} rows x {len(train.names)} features")
        with ctx.timed(f"train_{kind.value}"):
            model = _train(kind, train, ctx.run)
        ctx.stores.models.create_resource(kind.value, model.to_document())
        ctx.outputs.append(ctx.stores.models.path_for(kind.value))


def cmd_eval(ctx: CommandContext) -> None:
    test = _load_split(ctx, "test")
    results = {}
    for kind in _kinds(ctx.args.kind):
        model = _load_model(ctx, kind)
        metrics = evaluate(model, test.X, test.y, ctx.args.threshold)
        ctx.stores.metrics.create_resource(f"{kind.value}_metrics", metrics)
        ctx.outputs.append(ctx.stores.metrics.path_for(f"{kind.value}_metrics"))
        results[kind.value] = metrics.model_dump()
    print(json.dumps(results, indent=2))


def cmd_explain_lime(ctx: CommandContext) -> None:
    args = ctx.args
    kind = ModelKind(args.kind)
    train, test = _load_split(ctx, "train"), _load_split(ctx, "test")
    model = _load_model(ctx, kind)
    overrides = {
        "top_k": args.k,
        "n_samples": args.n_samples,
        "kernel_width": args.kernel_width,
        "discretizer": args.discretizer,
        "ridge_alpha": args.ridge_alpha,
    }
    cfg = ctx.run.lime.model_copy(update={**{k: v for k, v in overrides.items() if v is not None}, "seed": ctx.run.seed})
    cfg = type(cfg).model_validate(cfg.model_dump())
    bad = [i for i in args.instance if not 0 <= i < test.n_rows]
    if bad:
        raise ValueError(f"instances {bad} outside the {test.n_rows}-row test split")

    with ctx.timed("lime"):
        disc = fit_discretizer(train.X, train.names)
        explanations = explain_batch(model, test.X[args.instance], disc, cfg, list(args.instance), ctx.run.jobs)
    batch = ExplanationBatch(model=kind.value, explainer="lime", explanations=explanations)
    ctx.stores.explanations.create_resource(f"{kind.value}_lime", batch)
    ctx.outputs.append(ctx.stores.explanations.path_for(f"{kind.value}_lime"))
    for explanation in explanations:
        print(render_table(explanation))


def _parse_coalitions(value: str | None) -> int | str | None:
    if value is None or value == "exhaustive":
        return value
    return int(value)


def cmd_explain_shap(ctx: CommandContext) -> None:
    args = ctx.args
    kind = ModelKind(args.kind)
    train, test = _load_split(ctx, "train"), _load_split(ctx, "test")
    model = _load_model(ctx, kind)
    cfg = _shap_config(
        ctx,
        n_explain=args.n,
        n_coalitions=_parse_coalitions(args.coalitions),
        background=args.background,
        background_k=args.background_k,
    )
    cfg = ShapConfig.model_validate(cfg.model_dump())
    with ctx.timed("background"):
        bg = _background(train.X, cfg)
    with ctx.timed("shap"):
        sm = shap_matrix(model, test.X[: cfg.n_explain], bg, cfg, test.names, ctx.run.jobs)
    _write_shap(ctx, kind.value, "shap", sm)

    background = pd.DataFrame(bg.rows, columns=test.names)
    background["weight"] = bg.weights
    ctx.outputs.append(ctx.stores.shap_tables.create_resource(f"{kind.value}_shap_background", background))
    timings = pd.DataFrame({"instance": np.arange(sm.n_rows), "seconds": sm.timings})
    ctx.stores.shap_tables.create_resource(f"{kind.value}_shap_timings", timings)


def cmd_explain_exact(ctx: CommandContext) -> None:
    args = ctx.args
    kind = ModelKind(args.kind)
    train, test = _load_split(ctx, "train"), _load_split(ctx, "test")
    model = _load_model(ctx, kind)
    cfg = _shap_config(ctx, background_k=args.background_k)
    bg = _background(train.X, cfg)
    X_explain = test.X[: args.n]
    with ctx.timed("exact"):
        results = [exact_shapley(model, x, bg) for x in X_explain]
    D = len(test.names)
    sm = ShapMatrix(
        feature_names=test.names,
        phi=np.vstack([r.phi for r in results]) if results else np.zeros((0, D)),
        base_values=np.array([r.base_value for r in results]),
        fx=np.array([r.fx for r in results]),
        X=X_explain.copy(),
    )
    _write_shap(ctx, kind.value, "exact", sm)


def cmd_ale(ctx: CommandContext) -> None:
    args = ctx.args
    kind = ModelKind(args.kind)
    train = _load_split(ctx, "train")
    model = _load_model(ctx, kind)
    settings = ctx.run.ale
    n_intervals = args.intervals or settings.n_intervals
    link = args.link or settings.link
    wanted = args.features or settings.features or train.names
    features = [_feature_index(train.names, name) for name in wanted]

    with ctx.timed("ale"):
        curves = ale_curves(model, train.X, features, n_intervals, link, train.names, ctx.run.jobs)
        refinement = [refinement_check(model, train.X, j, n_intervals, link, train.names[j]) for j in features]
    report = AleReport(model=kind.value, link=link, curves=curves, refinement=refinement)
    ctx.stores.ale.create_resource(f"{kind.value}_ale", report)
    ctx.outputs.append(ctx.stores.ale.path_for(f"{kind.value}_ale"))

    rows = [
        {
            "feature": c.feature,
            "interval": b,
            "lower": c.edges[b],
            "upper": c.edges[b + 1],
            "count": c.counts[b],
            "effect": c.effects[b],
        }
        for c in curves
        for b in range(len(c.effects))
    ]
    frame = pd.DataFrame(rows, columns=["feature", "interval", "lower", "upper", "count", "effect"])
    ctx.outputs.append(ctx.stores.ale_tables.create_resource(f"{kind.value}_ale", frame))


def cmd_report(ctx: CommandContext) -> None:
    args = ctx.args
    kind = ModelKind(args.kind)
    sm = _load_shap(ctx, kind.value, args.explainer)
    top_n = args.top_n or ctx.run.report.top_n
    feature = getattr(args, "feature", None)

    if args.view == "summary":
        data = summary_data(sm, None, top_n)
    elif args.view == "dependence":
        mean_abs = sm.mean_abs()
        j = _feature_index(sm.feature_names, feature) if feature else int(np.argmax(mean_abs))
        data = dependence_data(sm, None, j)
    elif args.view == "force":
        sort = ByFeature(_feature_index(sm.feature_names, feature)) if feature else ByOutput()
        data = force_data(sm, sort)
    else:
        gain = information_gain_importance(_load_model(ctx, kind))
        data = importance_compare(gain, sm, top_n)
    paths = write_view(data, ctx.stores.reports, kind.value, args.explainer, args.view)
    ctx.outputs.extend(paths.values())


def cmd_bench(ctx: CommandContext) -> None:
    args = ctx.args
    kind = ModelKind(args.kind)
    train, test = _load_split(ctx, "train"), _load_split(ctx, "test")
    model = _load_model(ctx, kind)
    cfg = _shap_config(ctx)

    if args.experiment == "consistency":
        with ctx.timed("consistency"):
            report = consistency_experiment(
                model, test.X, _background(train.X, cfg), cfg, args.small, args.large, args.top_n, test.names, ctx.run.jobs
            )
    else:
        with ctx.timed("background"):
            report = background_experiment(
                model, train.X, test.X[: args.instances], cfg, args.background_k, args.raw, args.top_n, test.names
            )
    stem = f"{kind.value}_shap_{args.experiment}"
    store = ArtifactCRUD(type(report), ctx.stores.reports)
    store.create_resource(stem, report)
    ctx.outputs.append(store.path_for(stem))
    print(report.model_dump_json(indent=2))


HANDLERS: dict[str, Callable[[CommandContext], None]] = {
    "synth": cmd_synth,
    "prep": cmd_prep,
    "train": cmd_train,
    "eval": cmd_eval,
    "explain-lime": cmd_explain_lime,
    "explain-shap": cmd_explain_shap,
    "explain-exact": cmd_explain_exact,
    "ale": cmd_ale,
    "report-summary": cmd_report,
    "report-dependence": cmd_report,
    "report-force": cmd_report,
    "report-compare": cmd_report,
    "bench-consistency": cmd_bench,
    "bench-background": cmd_bench,
}


def command_name(args) -> str:
    sub = getattr(args, "method", None) or getattr(args, "view", None) or getattr(args, "experiment", None)
    return f"{args.command}-{sub}" if sub else args.command


def _configure_logging(level: str) -> None:
    logging.basicConfig(level=level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)
    for handler in logging.getLogger().handlers:
        handler.setLevel(level.upper())


def _fail(root: Path, name: str, error: Exception) -> None:
    if isinstance(error, CreditExplainerError):
        record = ErrorRecord(**error.to_record(), command=name)
    elif isinstance(error, OSError):
        record = ErrorRecord(error=str(error), code="IO_ERROR", detail=error.filename and str(error.filename), command=name)
    else:
        record = ErrorRecord(error=str(error), code="USAGE", command=name)
    print(record.model_dump_json(), file=sys.stderr)
    ArtifactCRUD(ErrorRecord, root / "manifests").create_resource("error", record)
    logger.error(f"❌ {name} failed: {record.error}")


def _usage_target(argv: list[str]) -> tuple[Path, str]:
    """Best-effort artifact root and command name from argv that failed to parse."""
    root = config.artifact_root
    for i, token in enumerate(argv):
        if token == "--root" and i + 1 < len(argv):
            root = argv[i + 1]
        elif token.startswith("--root="):
            root = token.split("=", 1)[1]
    commands = {name.split("-")[0] for name in HANDLERS}
    name = next((token for token in argv if token in commands), "usage")
    return Path(root), name


def run_command(argv: list[str] | None = None) -> int:
    """Parse, run one subcommand and write its manifest. Returns the process exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        root, name = _usage_target(argv)
        print(e.detail, file=sys.stderr)
        _fail(root, name, e)
        return 2
    except SystemExit as e:
        return int(e.code or 0)

    _configure_logging(args.log_level)
    name = command_name(args)
    root = Path(args.root)
    config_path = args.config or (config.run_conf if Path(config.run_conf).is_file() else None)
    try:
        run = RunConfig.load(config_path).with_overrides({"seed": args.seed, "jobs": args.jobs})
        if args.command == "prep":
            run = run.with_overrides(
                {
                    "prep.sparse_threshold": args.sparse_threshold,
                    "prep.r_max": args.r_max,
                    "prep.alpha": args.alpha,
                    "prep.test_fraction": args.test_fraction,
                }
            )
        ctx = CommandContext(args=args, run=run, stores=artifact_stores(root))
        if config_path:
            ctx.inputs.append(Path(config_path))
        HANDLERS[name](ctx)
    except CreditExplainerError as e:
        _fail(root, name, e)
        return 1
    except ValueError as e:
        _fail(root, name, e)
        return 2
    except OSError as e:
        _fail(root, name, e)
        return 1

    manifest = Manifest(
        command=name,
        argv=argv,
        config_hash=run.config_hash(),
        config=run.to_flat(),
        inputs=hash_paths(ctx.inputs),
        outputs=hash_paths(ctx.outputs),
        versions=package_versions(),
        timings=ctx.timings,
    )
    manifest_store(root).create_resource(name, manifest)
    logger.info(f"✅ {name} finished; manifest at {manifest_store(root).path_for(name)}")
    return 0
