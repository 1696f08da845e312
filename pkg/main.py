"""Main entry point for the fracmin command line: `python main.py <subcommand> ...`"""
import sys
from pathlib import Path
from typing import List, Optional

# Add the project root to Python path to ensure imports work
PROJECT_ROOT = Path(__file__).parent.absolute()
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

import config
from cli.commands import COMMANDS, CommandContext, resolve_config
from cli.manifest import RunManifest, write_manifest
from cli.parser import build_parser
from utils.errors import FracminError, MalformedInputError
from utils.logger import configure_logging, logger


def main(argv: Optional[List[str]] = None) -> int:
    """Parse, run one subcommand and map library errors onto exit statuses"""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except MalformedInputError as exc:
        logger.error(str(exc))
        return exc.exit_code

    log_file = config.LOGS_DIR / "fracmin_{time}.log" if config.LOG_TO_FILE else None
    configure_logging(args.log_level or config.LOG_LEVEL, log_file)
    try:
        cfg = resolve_config(args)
    except ValueError as exc:
        logger.error(f"invalid configuration: {exc}")
        return MalformedInputError.exit_code

    ctx = CommandContext(args=args, cfg=cfg)
    manifest = RunManifest(subcommand=args.command, argv=argv, seed=cfg.seed,
                           config={"args": vars(args), "quad": cfg.model_dump()})
    logger.info(f"fracmin {config.TOOL_VERSION}: {args.command} (seed {cfg.seed}, threads {cfg.threads})")
    try:
        code = COMMANDS[args.command](ctx)
    except FracminError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        code = exc.exit_code
    except ValueError as exc:
        # pydantic validation of user-supplied parameters
        logger.error(f"invalid input: {exc}")
        code = MalformedInputError.exit_code
    if ctx.out is not None:
        manifest.outputs = ctx.outputs
        write_manifest(ctx.out, manifest.finish(code))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
