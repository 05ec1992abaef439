"""Chat message shapes plus the structured prompt conventions that let
deterministic backends understand rendered prompts.

Every rendered prompt carries a `#task: <name>` marker line in its final
user message, and its payload lives in bracketed sections:

    [FACTS]
    bob is poor.
    [RULES]
    ...

Mock backends classify a request by the marker and read the sections; a
live model simply sees a well-structured prompt.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

TASK_TAGS = ("translate", "back-translate", "compare-step1", "compare-step2", "repair")

_MARKER = re.compile(r"^#task:\s*([a-z0-9-]+)\s*$", re.MULTILINE)
_SECTION = re.compile(r"^\[([A-Z][A-Z0-9_-]*)\]\s*$")

_ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in _ROLES:
            raise ValueError(f"bad message role {self.role!r}")


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[Message, ...]
    temperature: float = 0.0
    max_tokens: int = 2048

    def __post_init__(self):
        if not isinstance(self.messages, tuple):
            object.__setattr__(self, "messages", tuple(self.messages))
        if not self.messages:
            raise ValueError("a chat request needs at least one message")


def _iter_messages(request_or_messages):
    if isinstance(request_or_messages, ChatRequest):
        return request_or_messages.messages
    return tuple(request_or_messages)


def find_task_tag(request_or_messages) -> str | None:
    """Task tag of the last marker-bearing message, or None."""
    for message in reversed(_iter_messages(request_or_messages)):
        match = _MARKER.search(message.content)
        if match:
            return match.group(1)
    return None


def marked_payload(request_or_messages) -> str | None:
    """Content of the last marker-bearing message (the real payload, not a demo)."""
    for message in reversed(_iter_messages(request_or_messages)):
        if _MARKER.search(message.content):
            return message.content
    return None


def extract_sections(text: str) -> dict[str, str]:
    """Split `[NAME]`-headed sections into a name->body map (names lowered)."""
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for line in text.splitlines():
        match = _SECTION.match(line.strip())
        if match:
            current = sections.setdefault(match.group(1).lower(), [])
            continue
        if current is not None:
            current.append(line)
    return {name: "\n".join(lines).strip() for name, lines in sections.items()}


def section_lines(sections: dict[str, str], name: str) -> list[str]:
    body = sections.get(name, "")
    return [line.strip() for line in body.splitlines() if line.strip()]
