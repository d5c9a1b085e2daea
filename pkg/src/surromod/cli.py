"""Command-line interface.

Subcommands cover the whole pipeline: dataset generation, model training and
selection, evaluation, routing studies, an end-to-end seeded benchmark, and
the HTTP service. Success exits 0; runtime failures exit 1 after printing a
one-line JSON error to stderr; argparse usage errors exit 2.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__, bnn, svgp
from .artifact import RunManifest, load_model, save_model
from .design import load_dataset, load_space, save_dataset
from .evaluation import (evaluate, predict_set, ranking_sigma,
                         write_report_files)
from .router import evaluate_routing, fit_threshold
from .simulator import default_space, generate_dataset


def _cmd_generate(args) -> int:
    space = load_space(args.space) if args.space else default_space()
    ds = generate_dataset(space, args.n, seed=args.seed)
    save_dataset(ds, args.out)
    print(json.dumps({"written": args.out, "n": ds.n,
                      "inputs": ds.input_names, "outputs": ds.output_names}))
    return 0


def _parse_hidden(text: str) -> tuple[int, ...]:
    return tuple(int(w) for w in text.split(",") if w)


def _cmd_train(args) -> int:
    ds = load_dataset(args.data)
    if args.family == "bnn":
        arch = bnn.BnnArchitecture(len(ds.input_names), len(ds.output_names),
                                   hidden_layers=_parse_hidden(args.hidden),
                                   dropout_p=args.dropout)
        cfg = bnn.TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                              learning_rate=args.lr, seed=args.seed)
        model = bnn.train(bnn.init(arch, seed=args.seed), ds, cfg)
    else:
        cfg = svgp.SvgpConfig(kernel=args.kernel, n_inducing=args.inducing,
                              steps=args.steps, batch_size=args.batch_size,
                              learning_rate=args.lr, seed=args.seed)
        model = svgp.train(svgp.init(ds, cfg), ds, cfg)
    save_model(model, args.out, model_id=args.model_id)
    print(json.dumps({"written": args.out, "family": args.family,
                      "final_loss": float(model.train_log[-1])
                      if args.family == "bnn" else None}))
    return 0


def _cmd_crossval(args) -> int:
    ds = load_dataset(args.data)
    grid = bnn.default_grid(len(ds.input_names), len(ds.output_names))
    cfg = bnn.TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                          seed=args.seed)
    best, table = bnn.cross_validate(ds, grid, k=args.k, seed=args.seed,
                                     config=cfg, mc_samples=args.mc_samples)
    doc = {"best": {"hidden_layers": list(best.hidden_layers),
                    "dropout_p": best.dropout_p},
           "table": table}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
    print(json.dumps(doc["best"]))
    return 0


def _cmd_evaluate(args) -> int:
    model, model_id = load_model(args.model)
    ds = load_dataset(args.test)
    report = evaluate(model, ds, T=args.mc_samples, seed=args.seed,
                      model_id=model_id)
    paths = write_report_files(report, args.report, prefix=args.prefix)
    print(json.dumps({"written": paths[0],
                      "r2": {k: v.r2 for k, v in report.per_output.items()}}))
    return 0


def _cmd_evaluate_routing(args) -> int:
    model, model_id = load_model(args.model)
    ds = load_dataset(args.test)
    pcts = [float(p) for p in args.percentiles.split(",") if p]
    report = evaluate_routing(model, ds, percentiles=pcts, T=args.mc_samples,
                              seed=args.seed, latency_s=args.latency_s,
                              model_id=model_id)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
    print(json.dumps({"written": args.out, "percentiles": pcts}))
    return 0


def _cmd_benchmark(args) -> int:
    """Seeded end-to-end pipeline; every artifact lands in the manifest."""
    out = args.out_dir
    os.makedirs(out, exist_ok=True)
    manifest = RunManifest(
        seeds={"train_data": args.seed, "test_data": args.seed + 1,
               "bnn": args.seed, "svgp": args.seed, "eval": args.seed},
        config={"n_train": args.n_train, "n_test": args.n_test,
                "bnn_epochs": args.bnn_epochs, "svgp_steps": args.svgp_steps,
                "mc_samples": args.mc_samples, "tool_version": __version__})

    space = default_space()
    train_ds = generate_dataset(space, args.n_train, seed=args.seed)
    test_ds = generate_dataset(space, args.n_test, seed=args.seed + 1)
    train_path = os.path.join(out, "train.csv")
    test_path = os.path.join(out, "test.csv")
    save_dataset(train_ds, train_path)
    save_dataset(test_ds, test_path)

    arch = bnn.BnnArchitecture(len(train_ds.input_names),
                               len(train_ds.output_names),
                               hidden_layers=_parse_hidden(args.hidden),
                               dropout_p=args.dropout)
    bnn_cfg = bnn.TrainConfig(epochs=args.bnn_epochs, seed=args.seed)
    bnn_model = bnn.train(bnn.init(arch, seed=args.seed), train_ds, bnn_cfg)
    bnn_path = os.path.join(out, "model_bnn.json")
    save_model(bnn_model, bnn_path, model_id=f"bnn-seed{args.seed}")

    svgp_cfg = svgp.SvgpConfig(steps=args.svgp_steps, seed=args.seed,
                               n_inducing=args.inducing)
    svgp_model = svgp.train(svgp.init(train_ds, svgp_cfg), train_ds, svgp_cfg)
    svgp_path = os.path.join(out, "model_svgp.json")
    save_model(svgp_model, svgp_path, model_id=f"svgp-seed{args.seed}")

    report_paths = []
    summary = {}
    for name, model in (("bnn", bnn_model), ("svgp", svgp_model)):
        rep = evaluate(model, test_ds, T=args.mc_samples, seed=args.seed,
                       model_id=f"{name}-seed{args.seed}")
        report_paths += write_report_files(rep, out, prefix=f"eval_{name}")
        summary[name] = {k: v.r2 for k, v in rep.per_output.items()}

    routing = evaluate_routing(bnn_model, test_ds, T=args.mc_samples,
                               seed=args.seed, model_id=f"bnn-seed{args.seed}")
    routing_path = os.path.join(out, "routing_bnn.json")
    with open(routing_path, "w", encoding="utf-8") as fh:
        json.dump(routing.to_dict(), fh, indent=2, sort_keys=True)

    preds = predict_set(bnn_model, test_ds.X, T=args.mc_samples,
                        seed=args.seed)
    policy = fit_threshold(ranking_sigma(preds), percentile=90.0,
                           output_names=test_ds.output_names)
    policy_path = os.path.join(out, "policy.json")
    with open(policy_path, "w", encoding="utf-8") as fh:
        json.dump(policy.to_dict(), fh, indent=2, sort_keys=True)

    for p, role in ([(train_path, "train-data"), (test_path, "test-data"),
                     (bnn_path, "model"), (svgp_path, "model"),
                     (routing_path, "routing-report"), (policy_path, "policy")]
                    + [(p, "evaluation") for p in report_paths]):
        manifest.add(p, role, base_dir=out)
        sidecar = p + ".meta.json"
        if os.path.exists(sidecar):
            manifest.add(sidecar, "dataset-meta", base_dir=out)
    manifest_path = os.path.join(out, "manifest.json")
    manifest.write(manifest_path)
    print(json.dumps({"out_dir": out, "manifest": manifest_path,
                      "r2": summary}))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .router import ThresholdPolicy
    from .service import create_app

    model = model_id = policy = None
    if args.model:
        model, model_id = load_model(args.model)
    if args.policy:
        with open(args.policy, encoding="utf-8") as fh:
            policy = ThresholdPolicy.from_dict(json.load(fh))
    app = create_app(model=model, model_id=model_id, policy=policy,
                     simulate_latency_s=args.simulate_latency_ms / 1000.0,
                     mc_samples=args.mc_samples, mc_seed=args.mc_seed,
                     cors_origins=args.cors_origin)
    host, _, port = args.addr.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000),
                log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="surromod",
                                description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a design and run the simulator")
    g.add_argument("--space", help="design-space JSON (default: built-in)")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_generate)

    t = sub.add_parser("train", help="fit a surrogate to a dataset")
    t.add_argument("family", choices=["bnn", "svgp"])
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--model-id")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--epochs", type=int, default=1200, help="bnn only")
    t.add_argument("--hidden", default="512,512", help="bnn only")
    t.add_argument("--dropout", type=float, default=0.05, help="bnn only")
    t.add_argument("--steps", type=int, default=4000, help="svgp only")
    t.add_argument("--inducing", type=int, default=100, help="svgp only")
    t.add_argument("--kernel", default="matern32",
                   choices=["matern32", "squared_exponential"])
    t.add_argument("--batch-size", type=int, default=None)
    t.add_argument("--lr", type=float, default=None)
    t.set_defaults(func=_cmd_train_dispatch)

    c = sub.add_parser("crossval", help="k-fold architecture selection")
    c.add_argument("family", choices=["bnn"])
    c.add_argument("--data", required=True)
    c.add_argument("--k", type=int, default=5)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--epochs", type=int, default=1200)
    c.add_argument("--batch-size", type=int, default=128)
    c.add_argument("--mc-samples", type=int, default=30)
    c.add_argument("--out", help="write the full fold table as JSON")
    c.set_defaults(func=_cmd_crossval)

    e = sub.add_parser("evaluate", help="metric sweep on a test set")
    e.add_argument("--model", required=True)
    e.add_argument("--test", required=True)
    e.add_argument("--mc-samples", type=int, default=30)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--report", required=True, help="output directory")
    e.add_argument("--prefix", default="eval")
    e.set_defaults(func=_cmd_evaluate)

    r = sub.add_parser("evaluate-routing", help="routing trade-off study")
    r.add_argument("--model", required=True)
    r.add_argument("--test", required=True)
    r.add_argument("--percentiles", default="90,80")
    r.add_argument("--mc-samples", type=int, default=30)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--latency-s", type=float, default=None)
    r.add_argument("--out", required=True)
    r.set_defaults(func=_cmd_evaluate_routing)

    b = sub.add_parser("benchmark", help="full seeded pipeline with manifest")
    b.add_argument("--seed", type=int, default=1)
    b.add_argument("--out-dir", required=True)
    b.add_argument("--n-train", type=int, default=4000)
    b.add_argument("--n-test", type=int, default=1000)
    b.add_argument("--bnn-epochs", type=int, default=1200)
    b.add_argument("--svgp-steps", type=int, default=4000)
    b.add_argument("--hidden", default="512,512")
    b.add_argument("--dropout", type=float, default=0.05)
    b.add_argument("--inducing", type=int, default=100)
    b.add_argument("--mc-samples", type=int, default=30)
    b.set_defaults(func=_cmd_benchmark)

    s = sub.add_parser("serve", help="HTTP prediction/routing/simulation service")
    s.add_argument("--model")
    s.add_argument("--policy")
    s.add_argument("--addr", default="127.0.0.1:8000")
    s.add_argument("--simulate-latency-ms", type=float, default=0.0)
    s.add_argument("--mc-samples", type=int, default=30)
    s.add_argument("--mc-seed", type=int, default=None,
                   help="fix the MC seed for reproducible demo responses")
    s.add_argument("--cors-origin", default="*")
    s.set_defaults(func=_cmd_serve)
    return p


def _cmd_train_dispatch(args) -> int:
    # family-dependent defaults for the shared flags
    if args.batch_size is None:
        args.batch_size = 128 if args.family == "bnn" else 100
    if args.lr is None:
        args.lr = 1e-3 if args.family == "bnn" else 1e-2
    return _cmd_train(args)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
