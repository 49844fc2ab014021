"""Command-line entry points for corpus work, evaluation, and serving."""

import argparse
import json
import sys

from .backends import BackendConfig, ModelDescriptor, ScriptedBackend, load_backend
from .baseline import TfidfVectorizer, load_model, save_model, train
from .dataset import (
    REFERENCE_TEST_COUNTS,
    SplitSpec,
    export_training_corpus,
    load_dataset,
    split_fingerprint,
    stratified_split,
)
from .datagen import eligible_test_counts, generate_records, write_corpus
from .errors import EdgeHomeError, UnreadableFile
from .evaluation import (
    CorruptionInjector,
    backend_driver,
    baseline_driver,
    benchmark_latency,
    build_report,
    corrupted_driver,
    emit_json,
    emit_markdown,
    evaluate_slot_intent,
    regression_check,
    replay_script,
    report_from_json_obj,
    score_responses,
)

BASELINE_DISPLAY_NAME = "SVC (Baseline)"


def _load_samples(path: str, drop_multi_action: bool = False):
    result = load_dataset(path)
    if result.quarantined:
        print(f"quarantined {len(result.quarantined)} record(s):", file=sys.stderr)
        for entry in result.quarantined[:20]:
            print(f"  {entry.reason}", file=sys.stderr)
    samples = result.samples
    if drop_multi_action:
        samples = [s for s in samples if not s.multi_action]
    if not samples:
        raise EdgeHomeError(f"no usable samples in {path}")
    return samples


def _class_sizes(samples) -> dict[str, int]:
    sizes: dict[str, int] = {}
    for sample in samples:
        sizes[sample.class_label] = sizes.get(sample.class_label, 0) + 1
    return sizes


def cmd_synth(args) -> int:
    records = generate_records(args.count, seed=args.seed)
    write_corpus(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_split(args) -> int:
    samples = _load_samples(args.dataset, drop_multi_action=args.drop_multi_action)
    if args.reference_counts:
        spec = SplitSpec(seed=args.seed, per_class_counts=REFERENCE_TEST_COUNTS)
    elif args.eligible_only:
        counts = eligible_test_counts(_class_sizes(samples), args.test_fraction)
        spec = SplitSpec(seed=args.seed, per_class_counts=counts)
    else:
        spec = SplitSpec(seed=args.seed, test_fraction=args.test_fraction, floor=args.floor)
    train_set, test_set = stratified_split(samples, spec)
    export_training_corpus(train_set, args.train_out)
    export_training_corpus(test_set, args.test_out)
    fingerprint = split_fingerprint(spec, samples)
    print(f"train={len(train_set)} test={len(test_set)} fingerprint={fingerprint}")
    return 0


def cmd_export(args) -> int:
    samples = _load_samples(args.dataset, drop_multi_action=args.drop_multi_action)
    export_training_corpus(samples, args.out)
    print(f"exported {len(samples)} samples to {args.out}")
    return 0


def cmd_train_baseline(args) -> int:
    samples = _load_samples(args.dataset, drop_multi_action=True)
    corpus = [s.user_text for s in samples]
    labels = [f"{s.gold_device}|{s.gold_service}" for s in samples]
    vectorizer = TfidfVectorizer().fit(corpus)
    model = train(
        corpus,
        labels,
        vectorizer,
        seed=args.seed,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        regularization=args.regularization,
    )
    save_model(args.out, model, vectorizer)
    outcome = evaluate_slot_intent(baseline_driver(model, vectorizer), samples)
    print(
        f"trained on {len(samples)} samples, {len(model.labels)} labels, "
        f"{vectorizer.dim} features; train accuracy {outcome.accuracy:.3f}"
    )
    return 0


def _load_eval_backend(args):
    if args.replay:
        samples = _load_samples(args.dataset)
        config = BackendConfig(kind="scripted", model=ModelDescriptor("replay"))
        return load_backend(config, backend=ScriptedBackend(replay_script(samples)))
    config = BackendConfig.from_json_file(args.backend_config)
    if args.worker_threads:
        config.worker_threads = args.worker_threads
    return load_backend(config)


def cmd_eval(args) -> int:
    samples = _load_samples(args.dataset, drop_multi_action=args.drop_multi_action)
    decoding = {
        "temperature": args.temperature,
        "max_new_tokens": args.max_new_tokens,
        "seed": args.seed,
    }
    if args.baseline_model:
        model, vectorizer = load_model(args.baseline_model)
        driver = baseline_driver(model, vectorizer)
        workers = max(1, args.workers)
        name, extra = BASELINE_DISPLAY_NAME, {}
        with_similarity = False
    else:
        handle = _load_eval_backend(args)
        driver = backend_driver(handle, args.temperature, args.max_new_tokens, args.seed)
        # fan-out is only sound for reentrant (scripted) backends
        workers = max(1, args.workers) if handle.reentrant else 1
        name = handle.descriptor.name
        extra = {
            "parameter_scale": handle.descriptor.parameter_scale,
            "quantization": handle.descriptor.quantization,
            "backend_id": handle.backend_id,
        }
        with_similarity = not args.no_similarity

    if args.corrupt_rate:
        injector = CorruptionInjector(args.corrupt_rate, seed=args.corrupt_seed)
        plan = injector.plan(len(samples))
        driver = corrupted_driver(driver, samples, plan)
        print(f"injecting {plan.injected} corruptions", file=sys.stderr)

    outcome = evaluate_slot_intent(driver, samples, workers=workers)
    similarity = score_responses(outcome.results, samples) if with_similarity else None
    report = build_report(
        outcome,
        name,
        decoding=decoding,
        similarity=similarity,
        split_fingerprint=args.split_fingerprint,
        **extra,
    )
    if args.report_json:
        with open(args.report_json, "w", encoding="utf-8") as fh:
            fh.write(emit_json(report))
    if args.report_md:
        with open(args.report_md, "w", encoding="utf-8") as fh:
            fh.write(emit_markdown([report]))
    print(emit_markdown([report]), end="")
    errors = {k: v for k, v in report.error_counts.items() if v}
    if errors:
        print(f"errors: {errors}")

    if args.baseline_report:
        try:
            with open(args.baseline_report, encoding="utf-8") as fh:
                baseline = report_from_json_obj(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise UnreadableFile(f"{args.baseline_report}: {exc}") from None
        problems = regression_check(report, baseline)
        if problems:
            for problem in problems:
                print(f"REGRESSION {problem}", file=sys.stderr)
            return 1
        print("no error-class regressions", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    samples = _load_samples(args.dataset)
    if args.replay:
        config = BackendConfig(kind="scripted", model=ModelDescriptor("replay"))
        handle = load_backend(config, backend=ScriptedBackend(replay_script(samples)))
    else:
        config = BackendConfig.from_json_file(args.backend_config)
        handle = load_backend(config)
    if args.worker_threads:
        handle.configure_threads(args.worker_threads)
    summary = benchmark_latency(
        handle,
        samples,
        sample_count=args.sample_count,
        warmup=args.warmup,
        temperature=args.temperature,
        max_new_tokens=args.max_new_tokens,
    )
    payload = json.dumps(summary.to_json_obj(), indent=2, sort_keys=True)
    if args.report_json:
        with open(args.report_json, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    print(payload)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = BackendConfig.from_json_file(args.backend_config)
    if args.worker_threads:
        config.worker_threads = args.worker_threads
    handle = load_backend(config)
    app = create_app(
        handle, temperature=args.temperature, max_new_tokens=args.max_new_tokens
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgehome")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a synthetic desk-scale corpus")
    synth.add_argument("--out", required=True)
    synth.add_argument("--count", type=int, default=2000)
    synth.add_argument("--seed", type=int, default=0)
    synth.set_defaults(func=cmd_synth)

    split = sub.add_parser("split", help="stratified train/test split")
    split.add_argument("--dataset", required=True)
    split.add_argument("--train-out", required=True)
    split.add_argument("--test-out", required=True)
    split.add_argument("--seed", type=int, default=0)
    split.add_argument("--test-fraction", type=float, default=0.2)
    split.add_argument("--floor", type=int, default=0)
    split.add_argument("--eligible-only", action="store_true",
                       help="test side drawn only from parameter-free classes")
    split.add_argument("--reference-counts", action="store_true",
                       help="use the published per-class test counts")
    split.add_argument("--drop-multi-action", action="store_true")
    split.set_defaults(func=cmd_split)

    export = sub.add_parser("export", help="rewrite a dataset in canonical form")
    export.add_argument("--dataset", required=True)
    export.add_argument("--out", required=True)
    export.add_argument("--drop-multi-action", action="store_true")
    export.set_defaults(func=cmd_export)

    train_p = sub.add_parser("train-baseline", help="fit the TF-IDF linear classifier")
    train_p.add_argument("--dataset", required=True)
    train_p.add_argument("--out", required=True)
    train_p.add_argument("--seed", type=int, default=0)
    train_p.add_argument("--epochs", type=int, default=10)
    train_p.add_argument("--learning-rate", type=float, default=0.1)
    train_p.add_argument("--regularization", type=float, default=1e-4)
    train_p.set_defaults(func=cmd_train_baseline)

    eval_p = sub.add_parser("eval", help="slot/intent accuracy over a split")
    eval_p.add_argument("--dataset", required=True)
    eval_p.add_argument("--backend-config")
    eval_p.add_argument("--replay", action="store_true",
                        help="scripted backend replaying the dataset's own gold replies")
    eval_p.add_argument("--baseline-model")
    eval_p.add_argument("--workers", type=int, default=1)
    eval_p.add_argument("--worker-threads", type=int, default=0)
    eval_p.add_argument("--seed", type=int, default=0)
    eval_p.add_argument("--temperature", type=float, default=0.0)
    eval_p.add_argument("--max-new-tokens", type=int, default=256)
    eval_p.add_argument("--corrupt-rate", type=float, default=0.0)
    eval_p.add_argument("--corrupt-seed", type=int, default=0)
    eval_p.add_argument("--split-fingerprint")
    eval_p.add_argument("--no-similarity", action="store_true")
    eval_p.add_argument("--drop-multi-action", action="store_true")
    eval_p.add_argument("--report-json")
    eval_p.add_argument("--report-md")
    eval_p.add_argument("--baseline-report",
                        help="prior report JSON; exit 1 if any error-class rate regressed")
    eval_p.set_defaults(func=cmd_eval)

    bench = sub.add_parser("bench", help="per-query latency of a backend")
    bench.add_argument("--dataset", required=True)
    bench.add_argument("--backend-config")
    bench.add_argument("--replay", action="store_true")
    bench.add_argument("--sample-count", type=int, default=500)
    bench.add_argument("--warmup", type=int, default=3)
    bench.add_argument("--worker-threads", type=int, default=0)
    bench.add_argument("--temperature", type=float, default=0.0)
    bench.add_argument("--max-new-tokens", type=int, default=256)
    bench.add_argument("--report-json")
    bench.set_defaults(func=cmd_bench)

    serve = sub.add_parser("serve", help="run the assistant HTTP service")
    serve.add_argument("--backend-config", required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--worker-threads", type=int, default=0)
    serve.add_argument("--temperature", type=float, default=0.0)
    serve.add_argument("--max-new-tokens", type=int, default=256)
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "eval" and not (args.backend_config or args.replay or args.baseline_model):
        parser.error("eval needs --backend-config, --replay, or --baseline-model")
    if args.command == "bench" and not (args.backend_config or args.replay):
        parser.error("bench needs --backend-config or --replay")
    try:
        return args.func(args)
    except EdgeHomeError as exc:
        print(f"error [{exc.error_class}]: {exc.message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
