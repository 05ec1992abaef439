"""Prompt templates: one-shot demonstrations for the generation tasks
(translate, back-translate, repair) and two-step zero-shot
chain-of-thought prompts for the comparison judgment.

Templates are versioned text assets with a small front-matter header; see
templates/*.txt. Rendering is a pure function of (template, slot values).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .chat import Message

_SLOT = re.compile(r"\{([a-z][a-z0-9_]*)\}")
_SECTION_HEADER = re.compile(r"^== ([a-z ]+) ==$")

DEFAULT_TEMPLATE_DIR = Path(__file__).parent / "templates"


class TemplateError(Exception):
    """A template asset is malformed."""


class MissingSlotError(Exception):
    def __init__(self, slot: str, template: str = ""):
        where = f" for template {template!r}" if template else ""
        super().__init__(f"missing slot {slot!r}{where}")
        self.slot = slot


class UnparseableVerdictError(Exception):
    """Neither SAME nor DIFFERENT occurs in a step-2 reply."""


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    version: int
    slots: tuple[str, ...]
    system_text: str
    user_skeleton: str
    demo_user: str | None = None
    demo_assistant: str | None = None


def _parse_template(text: str, source: str) -> PromptTemplate:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "---":
        raise TemplateError(f"{source}: missing front matter")
    header: dict[str, str] = {}
    i = 1
    while i < len(lines) and lines[i].strip() != "---":
        if ":" in lines[i]:
            key, value = lines[i].split(":", 1)
            header[key.strip()] = value.strip()
        i += 1
    if i >= len(lines):
        raise TemplateError(f"{source}: unterminated front matter")

    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for line in lines[i + 1:]:
        match = _SECTION_HEADER.match(line.strip())
        if match:
            current = sections.setdefault(match.group(1), [])
            continue
        if current is not None:
            current.append(line)

    def body(name: str) -> str | None:
        if name not in sections:
            return None
        return "\n".join(sections[name]).strip("\n")

    name = header.get("name", "")
    if not name:
        raise TemplateError(f"{source}: front matter lacks a name")
    slots = tuple(s.strip() for s in header.get("slots", "").split(",") if s.strip())
    user = body("user")
    if user is None:
        raise TemplateError(f"{source}: template lacks a '== user ==' section")
    system = body("system") or ""
    demo_user = body("demo user")
    demo_assistant = body("demo assistant")
    if (demo_user is None) != (demo_assistant is None):
        raise TemplateError(f"{source}: demo user/assistant sections must come in pairs")

    referenced = set(_SLOT.findall(system)) | set(_SLOT.findall(user))
    undeclared = referenced - set(slots)
    if undeclared:
        raise TemplateError(f"{source}: undeclared slots {sorted(undeclared)}")
    unused = set(slots) - referenced
    if unused:
        raise TemplateError(f"{source}: declared but unused slots {sorted(unused)}")

    return PromptTemplate(
        name=name,
        version=int(header.get("version", "1")),
        slots=slots,
        system_text=system,
        user_skeleton=user,
        demo_user=demo_user,
        demo_assistant=demo_assistant,
    )


def _substitute(text: str, values: dict[str, str]) -> str:
    return _SLOT.sub(lambda m: values[m.group(1)], text)


class TemplateStore:
    """Loads template assets from a directory and renders message lists."""

    def __init__(self, directory: str | Path | None = None):
        self.directory = Path(directory) if directory else DEFAULT_TEMPLATE_DIR
        self._templates: dict[str, PromptTemplate] = {}
        for path in sorted(self.directory.glob("*.txt")):
            template = _parse_template(path.read_text(encoding="utf-8"), str(path))
            self._templates[template.name] = template
        if not self._templates:
            raise TemplateError(f"no templates found under {self.directory}")

    def names(self) -> list[str]:
        return sorted(self._templates)

    def get(self, name: str) -> PromptTemplate:
        try:
            return self._templates[name]
        except KeyError:
            raise TemplateError(f"unknown template {name!r}") from None

    def render(self, name: str, slots: dict[str, str]) -> list[Message]:
        template = self.get(name)
        values = {}
        for slot in template.slots:
            if slot not in slots:
                raise MissingSlotError(slot, name)
            values[slot] = str(slots[slot])
        messages: list[Message] = []
        if template.system_text.strip():
            messages.append(Message("system", _substitute(template.system_text, values)))
        if template.demo_user is not None:
            messages.append(Message("user", template.demo_user))
            messages.append(Message("assistant", template.demo_assistant or ""))
        messages.append(Message("user", _substitute(template.user_skeleton, values)))
        return messages


_VERDICT_TOKEN = re.compile(r"\b(same|different)\b", re.IGNORECASE)


def extract_verdict(reply: str) -> str:
    """Last standalone SAME/DIFFERENT token decides, case-insensitively."""
    matches = _VERDICT_TOKEN.findall(reply)
    if not matches:
        raise UnparseableVerdictError(f"no SAME/DIFFERENT token in {reply[:120]!r}")
    return matches[-1].lower()
