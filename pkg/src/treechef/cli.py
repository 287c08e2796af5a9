"""Command-line entry points.

Batch work (train/prune/policy/replay/evaluate) runs in-process against
the core package; `serve` hosts the HTTP/websocket service the browser
client talks to.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="treechef", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the teaming service")
    p_serve.add_argument("--config", default=None, help="service TOML config")
    p_serve.add_argument("--host", default=None)
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.add_argument("--data-dir", default=None)
    p_serve.add_argument("--registry", default=None)
    p_serve.add_argument("--tick-rate", type=float, default=None)
    p_serve.add_argument("--ui", default=None, help="built frontend dir to serve at /ui")

    p_train = sub.add_parser("train", help="train a policy")
    p_train.add_argument("--layout", required=True, help="builtin name or layout file")
    p_train.add_argument("--algo", choices=["idct", "fcp"], default="idct")
    p_train.add_argument("--config", default=None, help="training TOML config")
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.add_argument("--steps", type=int, default=None)
    p_train.add_argument("--seed", type=int, default=None)
    p_train.add_argument("--register", default=None,
                         help="also install the result into this registry dir")

    p_prune = sub.add_parser("prune", help="contextually prune a policy file")
    p_prune.add_argument("--in", dest="infile", required=True)
    p_prune.add_argument("--out", dest="outfile", required=True)
    p_prune.add_argument("--report", default=None)

    p_policy = sub.add_parser("policy", help="inspect policy documents")
    policy_sub = p_policy.add_subparsers(dest="policy_command", required=True)
    pv = policy_sub.add_parser("validate")
    pv.add_argument("file")
    pv.add_argument("--layout", default=None)
    pd = policy_sub.add_parser("diff")
    pd.add_argument("a")
    pd.add_argument("b")
    pr = policy_sub.add_parser("render")
    pr.add_argument("file")

    p_replay = sub.add_parser("replay", help="re-simulate an episode log")
    p_replay.add_argument("log")

    p_eval = sub.add_parser("evaluate", help="run teaming episodes and report scores")
    p_eval.add_argument("--layout", required=True)
    p_eval.add_argument("--agent-a", required=True,
                        help="heuristic:<name> | random | policy:<file> | dense:<file>")
    p_eval.add_argument("--agent-b", required=True)
    p_eval.add_argument("--episodes", type=int, default=50)
    p_eval.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    return {
        "serve": _cmd_serve,
        "train": _cmd_train,
        "prune": _cmd_prune,
        "policy": _cmd_policy,
        "replay": _cmd_replay,
        "evaluate": _cmd_evaluate,
    }[args.command](args)


def _resolve_agent(spec: str):
    from .agents import named_policy
    from .policy import deserialize
    from .agents import CrispTreePolicy

    if spec.startswith("policy:"):
        with open(spec.split(":", 1)[1], "rb") as fh:
            return CrispTreePolicy(deserialize(fh.read()).tree)
    if spec.startswith("dense:"):
        from .training.policies import DenseAgent, DensePolicy

        return DenseAgent(DensePolicy.load_weights(spec.split(":", 1)[1]))
    return named_policy(spec)


def _cmd_serve(args) -> int:
    import os

    import uvicorn

    from .service import ServiceConfig, create_app

    cfg = ServiceConfig.load(args.config)
    for name, value in (("host", args.host), ("port", args.port),
                        ("data_dir", args.data_dir), ("registry_path", args.registry),
                        ("tick_rate", args.tick_rate), ("ui_dir", args.ui)):
        if value is not None:
            setattr(cfg, name, value)
    os.makedirs(cfg.data_dir, exist_ok=True)
    app = create_app(cfg)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")
    return 0


def _cmd_train(args) -> int:
    from .training.config import TrainConfig
    from .training.loops import train_agent_agent, train_fcp

    cfg = TrainConfig.from_toml(args.config) if args.config else TrainConfig()
    cfg.layout = args.layout
    cfg.algo = args.algo
    if args.steps is not None:
        cfg.total_steps = args.steps
    if args.seed is not None:
        cfg.seed = args.seed

    def progress(tag, value):
        print(f"[train] {tag}: {value:.1f}" if isinstance(value, float) else f"[train] {tag} {value}")

    if args.algo == "idct":
        result = train_agent_agent(cfg, out_dir=args.out, progress=progress)
        print(f"trained {result.env_steps} steps; "
              f"pruned tree has {result.pruned_doc.tree.n_leaves} leaves")
        if args.register:
            from .service import PolicyRegistry

            PolicyRegistry(args.register).register_tree(cfg.layout, result.pruned_doc)
            print(f"registered tree policy for {cfg.layout} in {args.register}")
    else:
        result = train_fcp(cfg, out_dir=args.out, progress=progress)
        print(f"fcp population of {len(result.partners)} partners; "
              f"final eval mean {result.curve.mean[-1]:.1f}")
        if args.register:
            from .service import PolicyRegistry

            PolicyRegistry(args.register).register_dense(cfg.layout, result.agent.net)
            print(f"registered fcp weights for {cfg.layout} in {args.register}")
    return 0


def _cmd_prune(args) -> int:
    from .policy import PolicyDocument, deserialize, serialize
    from .pruning import prune

    with open(args.infile, "rb") as fh:
        doc = deserialize(fh.read())
    pruned_tree, report = prune(doc.tree)
    new_doc = PolicyDocument(
        layout=doc.layout, tree=pruned_tree,
        provenance=doc.provenance, parent_hash=doc.hash,
    ).with_event("pruned", note=f"{report.leaves_before}->{report.leaves_after} leaves")
    with open(args.outfile, "wb") as fh:
        fh.write(serialize(new_doc))
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report.to_dict(), fh, indent=1)
    print(f"pruned {report.nodes_before}->{report.nodes_after} nodes, "
          f"{report.leaves_before}->{report.leaves_after} leaves, "
          f"depth {report.depth_before}->{report.depth_after}")
    return 0


def _cmd_policy(args) -> int:
    from .policy import deserialize, diff, validate
    from .env.layout import builtin_layout

    if args.policy_command == "validate":
        with open(args.file, "rb") as fh:
            doc = deserialize(fh.read())
        layout = builtin_layout(args.layout) if args.layout else None
        problems = validate(doc, layout)
        if problems:
            for p in problems:
                print(f"{p['code']} at {p['path']}: {p['message']}")
            return 1
        print("ok")
        return 0
    if args.policy_command == "diff":
        docs = []
        for path in (args.a, args.b):
            with open(path, "rb") as fh:
                docs.append(deserialize(fh.read()))
        lines = diff(docs[0], docs[1])
        print("\n".join(lines) if lines else "identical")
        return 0
    with open(args.file, "rb") as fh:
        doc = deserialize(fh.read())
    print(doc.tree.render())
    return 0


def _cmd_replay(args) -> int:
    from .episode_log import replay

    with open(args.log) as fh:
        result = replay(fh)
    print(f"ticks: {result.ticks}  final score: {result.final_score} "
          f"(logged {result.logged_score})  exact: {result.exact}")
    for m in result.mismatches[:10]:
        print(f"  mismatch: {m}")
    return 0 if result.exact else 1


def _cmd_evaluate(args) -> int:
    from .training.loops import resolve_layout
    from .training.rollout import evaluate

    layout = resolve_layout(args.layout)
    a = _resolve_agent(args.agent_a)
    b = _resolve_agent(args.agent_b)
    result = evaluate(a, b, layout, n_episodes=args.episodes, seed=args.seed)
    print(f"mean {result['mean']:.2f}  std {result['std']:.2f}  over {args.episodes} episodes")
    print("scores:", result["scores"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
