"""Access to the prompt template data files shipped with the package.

Templates contain literal braces (JSON response formats), so placeholder
substitution is plain string replacement of {name} tokens, never
str.format.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=None)
def load_template(relative_path: str) -> str:
    base = resources.files("verifact") / "templates"
    return (base / relative_path).read_text(encoding="utf-8")


def render(relative_path: str, **substitutions: str) -> str:
    text = load_template(relative_path)
    for name, value in substitutions.items():
        token = "{" + name + "}"
        if token not in text:
            raise KeyError(f"template {relative_path} has no placeholder {token}")
        text = text.replace(token, value)
    return text
