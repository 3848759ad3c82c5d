"""Bridge host entry point.

`relog-bridge serve <plugin>` speaks the stdio protocol; `--describe`
prints the manifest and exits. The chat adapter plugin takes its config
file via `--config`.
"""

from __future__ import annotations

import argparse
import json
import sys


def load_plugin(name: str, config: str | None):
    if name == "mock_models":
        from relog_bridge.plugins.mock_models import plugin
        return plugin
    if name == "chat":
        if not config:
            raise SystemExit("the chat plugin needs --config <adapter.json>")
        from relog_bridge.adapters.chat import make_chat_plugin
        return make_chat_plugin(config)
    raise SystemExit(f"unknown plugin set '{name}'")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="relog-bridge")
    sub = parser.add_subparsers(dest="command", required=True)
    serve_cmd = sub.add_parser("serve", help="serve a plugin set over stdio")
    serve_cmd.add_argument("plugin")
    serve_cmd.add_argument("--config", default=None)
    serve_cmd.add_argument("--describe", action="store_true",
                           help="print the manifest and exit")
    args = parser.parse_args(argv)
    plugin = load_plugin(args.plugin, args.config)
    if args.describe:
        print(json.dumps(plugin.manifest(), indent=2, sort_keys=True))
        return 0
    from relog_bridge.host import serve
    serve(plugin)
    return 0


if __name__ == "__main__":
    sys.exit(main())
