"""Reference chat-completion adapter.

Renders few-shot prompts (header, then example question/answer pairs,
then the actual question), posts them to a configurable HTTP endpoint,
and parses the reply. On a parse failure it retries once with a
chain-of-thought suffix, then reports failure. Responses can be cached
on disk keyed by (model, prompt). Credentials come from an environment
variable named in the adapter config; they never appear in program text.

Adapter config file (JSON):
  {"endpoint": "https://.../v1/chat/completions", "model": "...",
   "temperature": 0, "api_key_env": "CHAT_API_KEY", "cache_dir": null}
"""

from __future__ import annotations

import hashlib
import json
import os
import urllib.request
from dataclasses import dataclass
from typing import Callable, Optional

COT_SUFFIX = "\nLet's think step by step, then answer in the requested format."


@dataclass
class AdapterConfig:
    endpoint: str
    model: str
    temperature: float = 0.0
    api_key_env: Optional[str] = None
    cache_dir: Optional[str] = None

    @classmethod
    def load(cls, path: str) -> "AdapterConfig":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(endpoint=doc["endpoint"], model=doc["model"],
                   temperature=doc.get("temperature", 0.0),
                   api_key_env=doc.get("api_key_env"),
                   cache_dir=doc.get("cache_dir"))


def render_prompt(header: str, examples: list, question_template: str,
                  bound: dict) -> str:
    """Header, one Question/Query block per example, then the question."""
    parts = [header.strip()] if header else []
    for example in examples or []:
        question, answer = example
        parts.append(f"Question: {question}\nQuery: {answer}")
    question = question_template
    for key, value in bound.items():
        question = question.replace("{{%s}}" % key, str(value))
    parts.append(question.strip() + "\nQuery:")
    return "\n".join(parts)


def fill_slots(template: str, bound: dict) -> str:
    out = template
    for key, value in bound.items():
        out = out.replace("{{%s}}" % key, str(value))
    return out


class ChatClient:
    def __init__(self, config: AdapterConfig,
                 transport: Optional[Callable[[str, dict], str]] = None):
        self.config = config
        self.transport = transport or self._http_transport

    def _http_transport(self, prompt: str, options: dict) -> str:
        body = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        body.update(options)
        headers = {"Content-Type": "application/json"}
        if self.config.api_key_env:
            key = os.environ.get(self.config.api_key_env, "")
            headers["Authorization"] = f"Bearer {key}"
        request = urllib.request.Request(
            self.config.endpoint, data=json.dumps(body).encode(),
            headers=headers, method="POST")
        with urllib.request.urlopen(request, timeout=60) as reply:
            doc = json.loads(reply.read())
        return doc["choices"][0]["message"]["content"]

    def _cache_path(self, prompt: str) -> Optional[str]:
        if not self.config.cache_dir:
            return None
        digest = hashlib.sha256(f"{self.config.model}\n{prompt}".encode()).hexdigest()
        return os.path.join(self.config.cache_dir, digest + ".txt")

    def complete(self, prompt: str) -> str:
        path = self._cache_path(prompt)
        if path and os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                return fh.read()
        text = self.transport(prompt, {})
        if path:
            os.makedirs(self.config.cache_dir, exist_ok=True)
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    def complete_parsed(self, prompt: str, parse: Callable[[str], object]):
        """Parse the reply; on failure retry once with a chain-of-thought
        suffix; if that also fails, raise the parse error."""
        reply = self.complete(prompt)
        try:
            return parse(reply)
        except Exception:
            retry_reply = self.complete(prompt + COT_SUFFIX)
            return parse(retry_reply)


def parse_json_rows(reply: str) -> list[tuple]:
    """Parse a JSON array-of-rows reply (relational extraction contract)."""
    start = reply.find("[")
    end = reply.rfind("]")
    if start < 0 or end < start:
        raise ValueError("reply carries no JSON array")
    rows = json.loads(reply[start:end + 1])
    if not isinstance(rows, list):
        raise ValueError("reply is not a JSON array")
    out = []
    for row in rows:
        if not isinstance(row, list):
            raise ValueError("rows must be arrays")
        out.append(tuple(row))
    return out


def make_chat_plugin(config_path: str,
                     transport: Optional[Callable[[str, dict], str]] = None):
    """Plugin exposing chat_complete / chat_extract / chat_semantic_parse."""
    from relog_bridge.sdk import Plugin, keywords

    config = AdapterConfig.load(config_path)
    client = ChatClient(config, transport)
    plugin = Plugin("chat")

    @plugin.attribute("chat_complete")
    @keywords("prompt", "examples", positional=1)
    def chat_complete(decl, pos_args, kw_args):
        kw = dict(kw_args)
        if pos_args:
            kw.setdefault("prompt", pos_args[0])
        template = kw.get("prompt", "{{input}}")
        examples = kw.get("examples", [])
        names = [a.name or f"arg{i}" for i, a in enumerate(decl.args)]
        bound_names = [a.name or f"arg{i}" for i, a in enumerate(decl.args)
                       if a.adornment == "bound"]

        def evaluate(bound: tuple):
            values = dict(zip(bound_names, bound))
            prompt = render_prompt("", examples, template, values)
            reply = client.complete_parsed(prompt, lambda text: text.strip())
            yield (None, (reply,))

        return evaluate

    @plugin.attribute("chat_extract")
    @keywords("prompt", "examples", positional=1)
    def chat_extract(decl, pos_args, kw_args):
        kw = dict(kw_args)
        if pos_args:
            kw.setdefault("prompt", pos_args[0])
        header = kw.get("prompt", "")
        examples = [(q, json.dumps(rows)) for q, rows in kw.get("examples", [])]

        def evaluate(bound: tuple):
            prompt = render_prompt(header, examples, str(bound[0]), {})
            rows = client.complete_parsed(prompt, parse_json_rows)
            for row in rows:
                yield (None, tuple(row))

        return evaluate

    @plugin.attribute("chat_semantic_parse")
    @keywords("header", "prompt", "examples", "target", "model", positional=1)
    def chat_semantic_parse(decl, pos_args, kw_args):
        kw = dict(kw_args)
        if pos_args:
            kw.setdefault("header", pos_args[0])
        header = kw.get("header", "")
        examples = kw.get("examples", [])

        def evaluate(bound: tuple):
            prompt = render_prompt(header, examples, str(bound[0]), {})
            reply = client.complete_parsed(prompt, lambda text: text.strip())
            yield (None, (reply,))

        return evaluate

    return plugin
