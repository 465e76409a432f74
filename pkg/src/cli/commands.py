"""
Подкоманды pgk: pddl validate, ground, gridworld gen, label, train, eval,
plan, loop, experiment
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from pydantic import ValidationError

from cli.experiment import DISTURBED_EPISODES, run_experiment
from gridworld.dataset import gen_dataset
from gridworld.environment import DOMAIN_PATH, PROBLEM_PATH, Gridworld, load_gridworld
from gridworld.renderer import GridRenderer
from grounding.actions import ground_all
from labeler.labeler import Labeler
from learn.checkpoint import load_header, load_model, save_model
from learn.data import load_split
from learn.metrics import evaluate
from learn.perception import ModelPerception, OraclePerception
from learn.training import train
from models.records import GridConfig, GroundActionRecord, RunConfig, TrainConfig
from parser.pddl_parser import load_domain, load_problem
from parser.pddl_writer import format_domain, format_problem
from planner.loop import run_episodes
from planner.search import DEFAULT_BUDGET, plan
from utils.errors import PgkError
from utils.io import write_csv, write_jsonl, write_meta
from utils.log_manager import get_log_manager
from utils.settings import get_settings

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("cli", logging.INFO)

DEFAULT_SEED = 7


def _load_world(args, ground: bool = True) -> Gridworld:
    """Домен и задача из аргументов; без них - встроенный Gridworld"""
    domain_path = getattr(args, "domain", None) or DOMAIN_PATH
    problem_path = getattr(args, "problem", None) or PROBLEM_PATH
    if Path(domain_path) == DOMAIN_PATH and Path(problem_path) == PROBLEM_PATH:
        return load_gridworld()
    domain = load_domain(domain_path)
    problem = load_problem(problem_path, domain)
    return Gridworld(domain, problem, tuple(ground_all(domain, problem.index)) if ground else ())


def _out(args, default: str) -> Path:
    return Path(args.out) if args.out else Path(default)


def cmd_pddl_validate(args) -> int:
    domain = load_domain(args.domain)
    print(
        f"domain {domain.name}: {len(domain.types.names)} types, "
        f"{len(domain.predicates)} predicates, {len(domain.actions)} actions"
    )
    if args.print:
        print(format_domain(domain))
    if args.problem:
        problem = load_problem(args.problem, domain)
        print(f"problem {problem.name}: {len(problem.objects)} objects, N={problem.index.n}")
        if args.print:
            print(format_problem(problem, domain))
    return 0


def cmd_ground(args) -> int:
    world = _load_world(args)
    index = world.index
    out = _out(args, "ground.jsonl")
    records = [
        GroundActionRecord(
            action=a.schema,
            args=list(a.args),
            pre_pos=index.names_of(a.pre_label.pos),
            pre_neg=index.names_of(a.pre_label.neg),
            post_pos=index.names_of(a.post_label.pos),
            post_neg=index.names_of(a.post_label.neg),
            advisories=list(a.advisories),
        )
        for a in world.actions
    ]
    write_jsonl(out, records)
    write_meta(out, index.digest(), args.seed, legend=index.names())
    logger.info(f"✅ {len(records)} заземленных действий -> {out}")
    return 0


def cmd_gridworld_gen(args) -> int:
    world = load_gridworld()
    cfg = GridConfig(height=args.height, width=args.width, prior=args.prior, seed=args.seed)
    gen_dataset(world, cfg, args.count, args.split, _out(args, f"data/{args.split}"))
    return 0


def cmd_label(args) -> int:
    world = _load_world(args, ground=False)
    out = _out(args, "labeled.jsonl")
    summary = Labeler(world.domain, world.index, world.actions).label_dataset(args.manifest, out)
    print(json.dumps(summary.to_dict(), indent=2, sort_keys=True))
    return summary.exit_code


def cmd_train(args) -> int:
    world = load_gridworld()
    cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        seed=args.seed,
        weighting=args.weighting,
        beta=args.beta,
        regime=args.regime,
        hidden=args.hidden,
    )
    data = load_split(args.data, world.index)
    test = load_split(args.test, world.index, labels=False).subset(cfg.curve_subset) if args.test else None
    result = train(cfg, data, test)
    out = _out(args, f"models/{cfg.regime}")
    save_model(result.model, out, cfg, world.index.digest(), data.renderer.channel_names)
    write_csv(
        out / "learning_curve.csv",
        ["epoch", "loss", "train_f1", "test_f1"],
        [
            [c.epoch, f"{c.loss:.6f}", f"{c.train_f1:.4f}", "" if c.test_f1 is None else f"{c.test_f1:.4f}"]
            for c in result.curves
        ],
        world.index.digest(),
        cfg.seed,
    )
    return 0


def _perception(args, renderer: GridRenderer):
    if args.oracle:
        return OraclePerception(renderer)
    if not args.model:
        raise PgkError("either --model or --oracle is required")
    return ModelPerception(load_model(args.model, renderer.index), renderer)


def cmd_eval(args) -> int:
    world = load_gridworld()
    test = load_split(args.data, world.index, labels=False)
    metrics = evaluate(_perception(args, test.renderer), test, threshold=args.threshold)
    out = _out(args, "metrics.csv")
    metrics.to_csv(out, world.index.digest(), args.seed)
    for row in metrics.csv_rows():
        print(",".join(row))
    return 0


def cmd_plan(args) -> int:
    world = _load_world(args)
    index = world.index
    result = plan(world.problem.init, world.problem.goal, world.actions, index, budget=args.budget)
    for name in result.names():
        print(name)
    logger.info(f"✅ План длины {result.depth}, раскрыто вершин {result.expanded}")
    return 0


def cmd_loop(args) -> int:
    world = load_gridworld()
    if args.model:
        header = load_header(args.model)
        renderer = GridRenderer(world.index, header["spec"]["height"], header["spec"]["width"])
    else:
        renderer = GridRenderer(world.index)
    perception = _perception(args, renderer)
    report = run_episodes(
        world, perception, renderer, args.episodes, args.horizon, args.seed, args.disturbed, args.budget
    )
    out = _out(args, "loop")
    write_jsonl(out / "loop.jsonl", [step for trace in report.traces for step in trace.steps])
    write_meta(out / "loop.jsonl", world.index.digest(), args.seed, **report.summary())
    print(json.dumps(report.summary(), indent=2, sort_keys=True))
    return 0


def cmd_experiment(args) -> int:
    config = RunConfig(
        command="experiment",
        out=_out(args, "experiment"),
        seed=args.seed,
        count=args.count,
        epochs=args.epochs,
        episodes=args.episodes,
        horizon=args.horizon,
    )
    grid = GridConfig(height=args.height, width=args.width, prior=args.prior, seed=args.seed)
    report = run_experiment(config, grid=grid)
    print(json.dumps({regime: round(m.f1, 4) for regime, m in report.metrics.items()}, sort_keys=True))
    return 0


def _grid_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--height", type=int, default=16, help="высота сетки")
    parser.add_argument("--width", type=int, default=16, help="ширина сетки")
    parser.add_argument("--prior", type=float, default=0.05, help="вероятность истинности пропозиции в s0")


def _pddl_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--domain", type=Path, help="файл домена PDDL")
    parser.add_argument("--problem", type=Path, help="файл задачи PDDL")


def _perception_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--model", type=Path, help="каталог чекпоинта")
    group.add_argument("--oracle", action="store_true", help="точный декодер вместо модели")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="корневой сид")
    common.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="файл или каталог результата")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="в консоль только WARNING")

    parser = argparse.ArgumentParser(prog="pgk", description="Partial state labels from PDDL actions", parents=[common])
    parser.set_defaults(seed=DEFAULT_SEED, out=None, quiet=False)
    sub = parser.add_subparsers(dest="command", required=True)

    pddl = sub.add_parser("pddl", help="операции над PDDL").add_subparsers(dest="pddl_command", required=True)
    validate = pddl.add_parser("validate", parents=[common], help="разобрать и проверить домен/задачу")
    validate.add_argument("domain", type=Path, help="файл домена PDDL")
    validate.add_argument("problem", type=Path, nargs="?", help="файл задачи PDDL")
    validate.add_argument("--print", action="store_true", help="напечатать нормализованный PDDL")
    validate.set_defaults(handler=cmd_pddl_validate)

    ground = sub.add_parser("ground", parents=[common], help="заземлить все действия задачи")
    ground.add_argument("domain", type=Path, help="файл домена PDDL")
    ground.add_argument("problem", type=Path, help="файл задачи PDDL")
    ground.set_defaults(handler=cmd_ground)

    gridworld = sub.add_parser("gridworld", help="симулятор Gridworld").add_subparsers(dest="grid_command", required=True)
    gen = gridworld.add_parser("gen", parents=[common], help="сгенерировать набор данных")
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--split", default="train")
    _grid_args(gen)
    gen.set_defaults(handler=cmd_gridworld_gen)

    label = sub.add_parser("label", parents=[common], help="разметить манифест")
    _pddl_args(label)
    label.add_argument("--manifest", type=Path, required=True)
    label.set_defaults(handler=cmd_label)

    train_p = sub.add_parser("train", parents=[common], help="обучить классификатор")
    train_p.add_argument("--regime", choices=["dnf", "oracle", "half_dnf"], default="dnf")
    train_p.add_argument("--data", type=Path, required=True)
    train_p.add_argument("--test", type=Path, help="набор для кривой test F1")
    train_p.add_argument("--epochs", type=int, default=20)
    train_p.add_argument("--batch-size", type=int, default=32)
    train_p.add_argument("--lr", type=float, default=1e-3)
    train_p.add_argument("--hidden", type=int, default=128)
    train_p.add_argument("--weighting", choices=["uniform", "class_balanced"], default="uniform")
    train_p.add_argument("--beta", type=float, default=0.999)
    train_p.set_defaults(handler=cmd_train)

    eval_p = sub.add_parser("eval", parents=[common], help="оценить против полного состояния")
    _perception_args(eval_p)
    eval_p.add_argument("--data", type=Path, required=True)
    eval_p.add_argument("--threshold", type=float, default=0.5)
    eval_p.set_defaults(handler=cmd_eval)

    plan_p = sub.add_parser("plan", parents=[common], help="найти план для задачи")
    _pddl_args(plan_p)
    plan_p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    plan_p.set_defaults(handler=cmd_plan)

    loop = sub.add_parser("loop", parents=[common], help="замкнутый цикл восприятие-план-действие")
    _perception_args(loop)
    loop.add_argument("--episodes", type=int, default=50)
    loop.add_argument("--horizon", type=int, default=100)
    loop.add_argument("--disturbed", type=int, default=DISTURBED_EPISODES, help="эпизодов с повторным запиранием двери")
    loop.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    loop.set_defaults(handler=cmd_loop)

    experiment = sub.add_parser("experiment", parents=[common], help="сравнение режимов обучения целиком")
    experiment.add_argument("--count", type=int, default=100)
    experiment.add_argument("--epochs", type=int, default=20)
    experiment.add_argument("--episodes", type=int, default=50)
    experiment.add_argument("--horizon", type=int, default=100)
    _grid_args(experiment)
    experiment.set_defaults(handler=cmd_experiment)
    return parser


PATH_ARGS = ("domain", "problem", "data", "model", "manifest")


def _check_paths(args) -> None:
    """Входные пути проверяются через RunConfig до запуска команды"""
    values = {name: getattr(args, name) for name in PATH_ARGS if getattr(args, name, None) is not None}
    if getattr(args, "test", None) is not None and not Path(args.test).exists():
        raise PgkError(f"test path does not exist: {args.test}")
    RunConfig(command=args.command, seed=args.seed, **values)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.quiet:
        log_manager.set_console_level(logging.WARNING)
    handler: Callable = args.handler
    logger.info(f"🚀 pgk {args.command} (seed {args.seed}, потоков {get_settings().threads})")
    try:
        _check_paths(args)
        return handler(args)
    except ValidationError as e:
        message = "; ".join(err["msg"] for err in e.errors())
        logger.error(f"❌ Неверные аргументы: {message}")
        print(f"pgk: error: {message}", file=sys.stderr)
        return 2
    except (PgkError, FileNotFoundError, IsADirectoryError, UnicodeDecodeError) as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        print(f"pgk: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
