"""Entry point tying the stages together.

Subcommands: gen-deals, gen-teacher-sl, sl, rl, eval, tournament, inspect,
play, verify. Settings merge in precedence order: built-in defaults, then the
named --profile, then the --config file (TOML, or a JSON mirror with the same
keys), then explicit flags. Every output file is written to a temporary path
and renamed into place, so a failed run leaves nothing partial behind; each
producing subcommand also drops a ``<out>.run.json`` sidecar that can be fed
back through --config to repeat the run.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
import time

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # 3.10 ships no tomllib
    import tomli as tomllib

from .auction import parse_call, replay_calls
from .deals import (
    GameVariant,
    SEAT_NAMES,
    format_deal,
    generate_deal,
    read_deals_file,
    write_deals_file,
)
from .dds import (
    MAX_SOLVER_RANKS,
    find_table_mismatches,
    load_dds_dataset,
    store_dds_dataset,
    tabulate,
)
from .errors import BridgeBidError, ConfigError, DataError
from .evaluation import (
    duplicate_match,
    match_csv_rows,
    play_console,
    round_robin,
    sampling_policy,
    tournament_csv_rows,
    tournament_long_rows,
)
from .features import observe, render_observation
from .neural import Checkpoint, load_checkpoint, store_checkpoint
from .train_rl import FspConfig, PpoConfig, fsp_train, rl_metrics_csv_rows
from .train_sl import (
    SlConfig,
    generate_teacher_dataset,
    load_sl_dataset,
    metrics_csv_rows,
    sl_train,
    store_sl_dataset,
)


@contextlib.contextmanager
def atomic_output(path):
    """Yield a temp path; rename it onto ``path`` only if the body succeeds."""
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        yield tmp
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def write_lines(path, lines) -> None:
    with atomic_output(path) as tmp:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line + "\n")


def write_json(path, payload) -> None:
    with atomic_output(path) as tmp:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


# Settings live in flat dicts keyed by flag name. Every subcommand declares
# its own defaults; profiles and config files may carry keys for any
# subcommand, and each subcommand picks out only the keys it declares.

_DEFAULTS = {
    "gen-deals": {"variant": "standard", "seed": 0, "count": 100, "board_start": 1},
    "gen-teacher-sl": {"variant": "standard", "seed": 0, "count": 1000},
    "sl": {
        "seed": 0,
        "learning_rate": 1e-4,
        "batch_size": 128,
        "epochs": 40,
        "eval_every": 1,
        "hidden_width": 1024,
        "hidden_layers": 4,
        "holdout": 0.1,
    },
    "rl": {
        "seed": 0,
        "learning_rate": 1e-6,
        "num_envs": 8192,
        "rollout_length": 32,
        "update_steps": 10_000,
        "epochs_per_update": 10,
        "minibatch_size": 1024,
        "entropy_coef": 1e-3,
        "gae_lambda": 0.95,
        "snapshot_every": 100,
        "hidden_width": 1024,
        "hidden_layers": 4,
    },
    "eval": {"seed": 0, "boards": 1000},
    "tournament": {"seed": 0, "boards": 200},
    "inspect": {"seed": 0},
    "play": {"variant": "standard", "seed": 0, "board": 1},
    "verify": {"seed": 0},
}

_PROFILES = {
    "desk": {
        "common": {"variant": "n5", "hidden_width": 64, "hidden_layers": 4},
        "sl": {"learning_rate": 1e-3, "epochs": 40, "batch_size": 128},
        "rl": {
            "num_envs": 256,
            "rollout_length": 32,
            "update_steps": 200,
            "snapshot_every": 40,
            "minibatch_size": 1024,
            "learning_rate": 3e-4,
            "entropy_coef": 1e-3,
        },
    },
    "full": {
        "common": {"variant": "standard", "hidden_width": 1024, "hidden_layers": 4},
        "sl": {"learning_rate": 1e-4, "epochs": 40, "batch_size": 128},
        "rl": {
            "num_envs": 8192,
            "rollout_length": 32,
            "update_steps": 10_000,
            "snapshot_every": 100,
            "minibatch_size": 1024,
            "learning_rate": 1e-6,
            "entropy_coef": 1e-3,
        },
    },
}

_ALL_KEYS: set[str] = set()
for _section in _DEFAULTS.values():
    _ALL_KEYS.update(_section)
for _profile in _PROFILES.values():
    for _part in _profile.values():
        _ALL_KEYS.update(_part)


def _load_config_file(path) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    text = raw.decode("utf-8", errors="replace").lstrip()
    try:
        if text.startswith("{"):
            loaded = json.loads(text)
        else:
            loaded = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"config file unparseable: {exc}") from None
    if not isinstance(loaded, dict):
        raise ConfigError("config file must hold a table of settings")
    return loaded


def merge_settings(args, command: str, defaults: dict) -> dict:
    """Defaults, then profile, then config file, then flags; later wins.

    The returned dict carries a ``__sources__`` entry mapping each key to the
    layer that supplied it, so callers can tell tuned defaults from explicit
    choices (the rl --no-sl multipliers only touch non-explicit values).
    """
    settings = dict(defaults)
    sources = {key: "default" for key in settings}

    def apply(layer: dict, tag: str, *, reject_unknown: bool) -> None:
        for key, value in layer.items():
            if key in settings:
                settings[key] = value
                sources[key] = tag
            elif reject_unknown and key not in _ALL_KEYS and key != "command":
                raise ConfigError(f"unknown config key {key!r}")

    if getattr(args, "profile", None):
        profile = _PROFILES[args.profile]
        apply(profile["common"], "profile", reject_unknown=False)
        apply(profile.get(command, {}), "profile", reject_unknown=False)
    if getattr(args, "config", None):
        apply(_load_config_file(args.config), "config", reject_unknown=True)
    flag_layer = {
        key: getattr(args, key)
        for key in defaults
        if getattr(args, key, None) is not None
    }
    apply(flag_layer, "flag", reject_unknown=False)
    settings["__sources__"] = sources
    return settings


def write_run_sidecar(out_path, command: str, settings: dict) -> None:
    payload = {k: v for k, v in settings.items() if k != "__sources__"}
    payload["command"] = command
    write_json(f"{os.fspath(out_path)}.run.json", payload)


def _variant(settings) -> GameVariant:
    try:
        return GameVariant.from_name(settings["variant"])
    except DataError as exc:
        raise ConfigError(str(exc)) from None


def _positive(settings, *keys) -> None:
    for key in keys:
        if settings[key] <= 0:
            raise ConfigError(f"--{key.replace('_', '-')} must be positive")


# --- subcommands -----------------------------------------------------------


def cmd_gen_deals(args) -> int:
    settings = merge_settings(args, "gen-deals", _DEFAULTS["gen-deals"])
    _positive(settings, "count", "board_start")
    variant = _variant(settings)
    boards = range(
        settings["board_start"], settings["board_start"] + settings["count"]
    )
    deals = [generate_deal(settings["seed"], variant, board) for board in boards]
    if variant.ranks_per_suit <= MAX_SOLVER_RANKS:
        records = [tabulate(deal) for deal in deals]
        with atomic_output(args.out) as tmp:
            store_dds_dataset(records, tmp)
        kind = "deals with double-dummy tables"
    else:
        with atomic_output(args.out) as tmp:
            write_deals_file(deals, tmp)
        kind = "deals (deck too large to solve; no tables)"
    write_run_sidecar(args.out, "gen-deals", settings)
    print(f"wrote {len(deals)} {kind} to {args.out}")
    return 0


def cmd_gen_teacher_sl(args) -> int:
    settings = merge_settings(args, "gen-teacher-sl", _DEFAULTS["gen-teacher-sl"])
    _positive(settings, "count")
    records = generate_teacher_dataset(
        _variant(settings), settings["count"], settings["seed"]
    )
    with atomic_output(args.out) as tmp:
        store_sl_dataset(records, tmp)
    write_run_sidecar(args.out, "gen-teacher-sl", settings)
    print(f"wrote {len(records)} teacher-bid boards to {args.out}")
    return 0


def _split_holdout(records, fraction: float, seed: int):
    if not 0.0 <= fraction < 1.0:
        raise ConfigError("--holdout must lie in [0, 1)")
    k = round(len(records) * fraction)
    if k == 0:
        return records, None
    order = np.random.default_rng([seed, 0x5EED]).permutation(len(records))
    held = [records[i] for i in order[:k]]
    kept = [records[i] for i in order[k:]]
    return kept, held


def cmd_sl(args) -> int:
    settings = merge_settings(args, "sl", _DEFAULTS["sl"])
    _positive(settings, "learning_rate", "batch_size", "epochs", "eval_every")
    records = load_sl_dataset(args.data)
    train_records, eval_records = _split_holdout(
        records, settings["holdout"], settings["seed"]
    )
    config = SlConfig(
        learning_rate=settings["learning_rate"],
        batch_size=settings["batch_size"],
        epochs=settings["epochs"],
        seed=settings["seed"],
        eval_every=settings["eval_every"],
    )
    started = time.monotonic()
    checkpoint, history = sl_train(
        train_records,
        config,
        hidden_width=settings["hidden_width"],
        hidden_layers=settings["hidden_layers"],
        eval_records=eval_records,
    )
    with atomic_output(args.out) as tmp:
        store_checkpoint(checkpoint, tmp)
    if args.metrics:
        write_lines(args.metrics, metrics_csv_rows(history))
    write_run_sidecar(args.out, "sl", settings)
    last = history[-1]
    held = f", held-out top-1 {last.eval_acc:.4f}" if last.eval_acc is not None else ""
    print(
        f"trained {len(train_records)} boards for {config.epochs} epochs "
        f"in {time.monotonic() - started:.1f}s: train loss {last.train_loss:.4f}"
        f"{held}; checkpoint {args.out}"
    )
    return 0


def cmd_rl(args) -> int:
    settings = merge_settings(args, "rl", _DEFAULTS["rl"])
    sources = settings["__sources__"]
    initial = None
    if args.no_sl:
        # Starting cold: raise the learning rate 10x and train for twice as
        # many updates, unless the caller pinned those values explicitly.
        if sources["learning_rate"] in ("default", "profile"):
            settings["learning_rate"] *= 10.0
        if sources["update_steps"] in ("default", "profile"):
            settings["update_steps"] *= 2
    elif args.init:
        initial = load_checkpoint(args.init)
    else:
        raise ConfigError("rl needs --init <checkpoint> unless --no-sl is given")
    _positive(
        settings,
        "learning_rate",
        "num_envs",
        "rollout_length",
        "update_steps",
        "epochs_per_update",
        "minibatch_size",
        "snapshot_every",
    )
    records = load_dds_dataset(args.data)
    config = PpoConfig(
        num_envs=settings["num_envs"],
        rollout_length=settings["rollout_length"],
        gae_lambda=settings["gae_lambda"],
        entropy_coef=settings["entropy_coef"],
        minibatch_size=settings["minibatch_size"],
        learning_rate=settings["learning_rate"],
        update_steps=settings["update_steps"],
        epochs_per_update=settings["epochs_per_update"],
        seed=settings["seed"],
    )
    fsp = FspConfig(
        snapshot_every=settings["snapshot_every"], use_pool=not args.no_fsp
    )

    def report(update, row, buffer, episodes):
        if args.quiet or update % max(1, config.update_steps // 20):
            return
        print(
            f"update {update}/{config.update_steps}: reward {row.mean_reward:+.4f} "
            f"entropy {row.entropy:.3f} kl {row.approx_kl:.5f}"
        )

    result = fsp_train(
        records,
        config,
        fsp,
        initial=initial,
        hidden_width=settings["hidden_width"],
        hidden_layers=settings["hidden_layers"],
        on_update=report,
        abort_dump_path=f"{args.out}.aborted",
    )
    with atomic_output(args.out) as tmp:
        store_checkpoint(result.checkpoint, tmp)
    if args.snapshot_dir:
        os.makedirs(args.snapshot_dir, exist_ok=True)
        for update, params in result.snapshots:
            snap = Checkpoint(
                params=params,
                provenance=dict(result.checkpoint.provenance, update=update),
            )
            path = os.path.join(args.snapshot_dir, f"snapshot-{update:06d}.ckpt")
            with atomic_output(path) as tmp:
                store_checkpoint(snap, tmp)
    if args.metrics:
        write_lines(args.metrics, rl_metrics_csv_rows(result.metrics))
    write_run_sidecar(args.out, "rl", settings)
    last = result.metrics[-1]
    print(
        f"finished {config.update_steps} updates "
        f"({'no pool' if args.no_fsp else f'pool size {last.pool_size}'}, "
        f"dataset wrapped {result.feed_wraps} times): "
        f"mean reward {last.mean_reward:+.4f}; checkpoint {args.out}"
    )
    return 0


def _checkpoint_policy(path, *, sample: bool, seed: int, tag: int):
    checkpoint = load_checkpoint(path)
    if sample:
        return sampling_policy(
            checkpoint.params, np.random.default_rng([seed, 0xE7A1, tag])
        )
    return checkpoint


def cmd_eval(args) -> int:
    settings = merge_settings(args, "eval", _DEFAULTS["eval"])
    _positive(settings, "boards")
    records = load_dds_dataset(args.data)
    policy_a = _checkpoint_policy(
        args.a, sample=args.sample, seed=settings["seed"], tag=0
    )
    policy_b = _checkpoint_policy(
        args.b, sample=args.sample, seed=settings["seed"], tag=1
    )
    result = duplicate_match(policy_a, policy_b, records, settings["boards"])
    print(f"{args.a} vs {args.b}: {result.summary()}")
    if args.csv:
        write_lines(args.csv, match_csv_rows(result))
    if args.out:
        write_json(
            args.out,
            {
                "a": os.fspath(args.a),
                "b": os.fspath(args.b),
                "boards": result.boards,
                "imps_per_board": result.imps_per_board,
                "standard_error": result.standard_error,
                "sampled": bool(args.sample),
                "seed": settings["seed"],
            },
        )
        write_run_sidecar(args.out, "eval", settings)
    return 0


def _entry_label(path: str, taken: set[str]) -> str:
    checkpoint = load_checkpoint(path)
    update = checkpoint.provenance.get("update")
    stage = checkpoint.provenance.get("stage", "")
    label = f"{stage}-{update}" if update is not None else ""
    if not label or label in taken:
        label = os.path.splitext(os.path.basename(os.fspath(path)))[0]
    while label in taken:
        label += "+"
    taken.add(label)
    return label


def cmd_tournament(args) -> int:
    settings = merge_settings(args, "tournament", _DEFAULTS["tournament"])
    _positive(settings, "boards")
    paths = list(args.checkpoints)
    if args.dir:
        found = sorted(
            os.path.join(args.dir, name)
            for name in os.listdir(args.dir)
            if name.endswith(".ckpt")
        )
        paths.extend(found)
    if len(paths) < 2:
        raise ConfigError("tournament needs at least two checkpoints")
    records = load_dds_dataset(args.data)
    taken: set[str] = set()
    entries = []
    for path in paths:
        label = _entry_label(path, taken)
        entries.append((label, load_checkpoint(path).params))
    matrix = round_robin(entries, records, settings["boards"])
    for line in tournament_csv_rows(matrix):
        print(line)
    if args.out:
        write_lines(args.out, tournament_csv_rows(matrix))
        write_run_sidecar(args.out, "tournament", settings)
    if args.long:
        write_lines(args.long, tournament_long_rows(matrix))
    return 0


def _load_any_deals(path):
    """Deals from either dataset flavor: table records or bare deal lines."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                has_tables = '"dds"' in line
                break
        else:
            raise DataError("dataset is empty")
    if has_tables:
        return [record.deal for record in load_dds_dataset(path)]
    return read_deals_file(path)


def cmd_inspect(args) -> int:
    merge_settings(args, "inspect", _DEFAULTS["inspect"])  # validates --config
    deals = _load_any_deals(args.data)
    if not 0 <= args.index < len(deals):
        raise ConfigError(
            f"--index {args.index} out of range for {len(deals)} boards"
        )
    deal = deals[args.index]
    calls = [parse_call(token) for token in (args.calls or "").split()]
    state = replay_calls(deal.variant, deal.dealer, calls)
    observation = observe(state, deal)
    print(f"board {args.index}: {format_deal(deal)}")
    print(
        f"dealer {SEAT_NAMES[deal.dealer]}, vul {deal.vulnerability.value}, "
        f"{SEAT_NAMES[state.to_act]} to act "
        f"({observation.bits.sum()} of {len(observation.bits)} bits set)"
    )
    for line in render_observation(deal.variant, observation.bits, observation.mask):
        print(line)
    return 0


def cmd_play(args) -> int:
    settings = merge_settings(args, "play", _DEFAULTS["play"])
    _positive(settings, "board")
    checkpoint = load_checkpoint(args.checkpoint)
    seat = SEAT_NAMES.find(args.seat.strip().upper())
    if seat < 0:
        raise ConfigError(f"unknown seat {args.seat!r} (use N, E, S, or W)")
    if args.data:
        deals = _load_any_deals(args.data)
        index = settings["board"] - 1
        if not 0 <= index < len(deals):
            raise ConfigError(f"--board {settings['board']} out of range")
        deal = deals[index]
    else:
        deal = generate_deal(settings["seed"], _variant(settings), settings["board"])
    play_console(checkpoint, seat, deal, sys.stdin, sys.stdout)
    return 0


def cmd_verify(args) -> int:
    merge_settings(args, "verify", _DEFAULTS["verify"])  # validates --config
    with open(args.data, encoding="utf-8") as fh:
        head = next((line for line in fh if line.strip()), "")
    if not head:
        print(f"{args.data}: empty dataset, nothing to verify")
        return 0
    if '"dds"' not in head:
        deals = read_deals_file(args.data)
        print(f"{args.data}: {len(deals)} deals, structure valid (no tables)")
        return 0
    records = load_dds_dataset(args.data)
    if args.limit is not None:
        records = records[: args.limit]
    if records and records[0].deal.variant.ranks_per_suit > MAX_SOLVER_RANKS:
        print(
            f"{args.data}: {len(records)} records, structure valid "
            "(deck too large to recompute tables)"
        )
        return 0
    mismatches = find_table_mismatches(records)
    if mismatches:
        for position, stored, recomputed in mismatches:
            print(
                f"record {position}: stored table {list(stored.tricks)} "
                f"!= solver {list(recomputed.tricks)}"
            )
        raise DataError(f"{len(mismatches)} of {len(records)} tables disagree")
    print(f"{args.data}: {len(records)} records, all tables match the solver")
    return 0


# --- argument wiring --------------------------------------------------------


def _int_flag(sub, name, help_text):
    sub.add_argument(name, type=int, default=None, help=help_text)


def _float_flag(sub, name, help_text):
    sub.add_argument(name, type=float, default=None, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master RNG seed")
    common.add_argument(
        "--config", default=None, help="TOML settings file (or JSON mirror)"
    )
    common.add_argument(
        "--profile",
        choices=sorted(_PROFILES),
        default=None,
        help="named bundle of defaults applied under the config file and flags",
    )

    parser = argparse.ArgumentParser(
        prog="bridgebid",
        description="Bidding-only bridge training laboratory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "gen-deals",
        parents=[common],
        help="deal boards; decks of 7 ranks or fewer get double-dummy tables",
    )
    p.add_argument("--variant", default=None, help="deck size, 'standard' or n3..n13")
    _int_flag(p, "--count", "number of boards")
    _int_flag(p, "--board-start", "first board number (vulnerability cycle)")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.set_defaults(handler=cmd_gen_deals)

    p = sub.add_parser(
        "gen-teacher-sl",
        parents=[common],
        help="generate a rule-teacher bidding dataset for supervised training",
    )
    p.add_argument("--variant", default=None)
    _int_flag(p, "--count", "number of boards")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_gen_teacher_sl)

    p = sub.add_parser(
        "sl", parents=[common], help="supervised pretraining on a bidding dataset"
    )
    p.add_argument("--data", required=True, help="JSONL board records")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--metrics", default=None, help="per-epoch CSV path")
    _float_flag(p, "--learning-rate", "Adam step size")
    _int_flag(p, "--batch-size", "minibatch size")
    _int_flag(p, "--epochs", "training epochs")
    _int_flag(p, "--eval-every", "epochs between held-out evaluations")
    _int_flag(p, "--hidden-width", "trunk layer width")
    _int_flag(p, "--hidden-layers", "trunk depth")
    _float_flag(p, "--holdout", "fraction of boards held out for evaluation")
    p.set_defaults(handler=cmd_sl)

    p = sub.add_parser(
        "rl", parents=[common], help="PPO self-play training over table records"
    )
    p.add_argument("--data", required=True, help="JSONL records with tables")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--init", default=None, help="warm-start checkpoint")
    p.add_argument("--metrics", default=None, help="per-update CSV path")
    p.add_argument("--snapshot-dir", default=None, help="directory for pool snapshots")
    p.add_argument(
        "--no-sl",
        action="store_true",
        help="start from random weights with 10x learning rate and 2x updates",
    )
    p.add_argument(
        "--no-fsp",
        action="store_true",
        help="train against the live learner instead of the snapshot pool",
    )
    p.add_argument("--quiet", action="store_true", help="suppress progress lines")
    _float_flag(p, "--learning-rate", "Adam step size")
    _int_flag(p, "--num-envs", "parallel auction slots")
    _int_flag(p, "--rollout-length", "learner decisions per slot per update")
    _int_flag(p, "--update-steps", "PPO updates")
    _int_flag(p, "--epochs-per-update", "passes over each rollout buffer")
    _int_flag(p, "--minibatch-size", "transitions per gradient step")
    _float_flag(p, "--entropy-coef", "entropy bonus weight")
    _float_flag(p, "--gae-lambda", "advantage estimation lambda")
    _int_flag(p, "--snapshot-every", "updates between pool snapshots")
    _int_flag(p, "--hidden-width", "trunk layer width (cold start only)")
    _int_flag(p, "--hidden-layers", "trunk depth (cold start only)")
    p.set_defaults(handler=cmd_rl)

    p = sub.add_parser(
        "eval", parents=[common], help="duplicate match between two checkpoints"
    )
    p.add_argument("--a", required=True, help="first checkpoint (sits NS in room 1)")
    p.add_argument("--b", required=True, help="second checkpoint")
    p.add_argument("--data", required=True, help="JSONL records with tables")
    _int_flag(p, "--boards", "boards to play (each twice)")
    p.add_argument("--out", default=None, help="JSON summary path")
    p.add_argument("--csv", default=None, help="per-board CSV path")
    p.add_argument(
        "--sample", action="store_true", help="sample calls instead of argmax"
    )
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser(
        "tournament", parents=[common], help="round-robin over several checkpoints"
    )
    p.add_argument("checkpoints", nargs="*", help="checkpoint paths")
    p.add_argument("--dir", default=None, help="directory of .ckpt files to include")
    p.add_argument("--data", required=True)
    _int_flag(p, "--boards", "boards per pairing")
    p.add_argument("--out", default=None, help="tanh matrix CSV path")
    p.add_argument("--long", default=None, help="long-format CSV path")
    p.set_defaults(handler=cmd_tournament)

    p = sub.add_parser(
        "inspect", parents=[common], help="print one observation, segment by segment"
    )
    p.add_argument("--data", required=True, help="deals or table-record JSONL")
    p.add_argument("--index", type=int, default=0, help="board position in the file")
    p.add_argument(
        "--calls", default="", help="auction prefix, e.g. 'P 1C X' (observer acts next)"
    )
    p.set_defaults(handler=cmd_inspect)

    p = sub.add_parser(
        "play", parents=[common], help="bid one board against checkpoint bots"
    )
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--seat", default="N", help="your seat: N, E, S, or W")
    p.add_argument("--variant", default=None)
    _int_flag(p, "--board", "board number (sets dealer and vulnerability)")
    p.add_argument("--data", default=None, help="take the deal from this file instead")
    p.set_defaults(handler=cmd_play)

    p = sub.add_parser(
        "verify", parents=[common], help="check a dataset against the solver"
    )
    p.add_argument("--data", required=True)
    _int_flag(p, "--limit", "verify only the first K records")
    p.set_defaults(handler=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse has already printed the usage message
        return 0 if not exc.code else 2
    try:
        return args.handler(args)
    except BridgeBidError as exc:
        kind = type(exc).__name__
        print(f"error: {kind}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: OSError: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
