from relog_bridge.host import Host, serve
from relog_bridge.sdk import Plugin, keywords

__all__ = ["Host", "serve", "Plugin", "keywords"]
