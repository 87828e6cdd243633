import argparse
import sys

from .service import ServiceConfig, ServiceStartupError, serve


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cca-bridge-service",
        description="Serve the cca-bridge/1 scoring protocol",
    )
    parser.add_argument("--spec", help="scene spec JSON file to host")
    parser.add_argument("--adapter", help="name of a registered detector adapter")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8731)
    args = parser.parse_args(argv)
    config = ServiceConfig(
        host=args.host, port=args.port, spec_path=args.spec, adapter=args.adapter
    )
    try:
        serve(config)
    except ServiceStartupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    sys.exit(main())
