"""Encoding presets v1 through v4."""
from dataclasses import dataclass

from ..exceptions import UnknownPreset


@dataclass(frozen=True)
class CodecPreset:
    id: str
    split_uris: bool
    merged_tokens: bool
    whitespace_fix: bool
    lowercase_keywords: bool

    @property
    def open_token(self):
        return "brack_open" if self.merged_tokens else "{"

    @property
    def close_token(self):
        return "brack_close" if self.merged_tokens else "}"

    @property
    def sep_token(self):
        return "sep_dot" if self.merged_tokens else "."

    def __str__(self):
        return self.id


V1 = CodecPreset("v1", split_uris=True, merged_tokens=False, whitespace_fix=False, lowercase_keywords=False)
V1_1 = CodecPreset("v1.1", split_uris=True, merged_tokens=False, whitespace_fix=False, lowercase_keywords=True)
V2_1 = CodecPreset("v2.1", split_uris=True, merged_tokens=False, whitespace_fix=True, lowercase_keywords=True)
V3 = CodecPreset("v3", split_uris=False, merged_tokens=True, whitespace_fix=True, lowercase_keywords=True)
V4 = CodecPreset("v4", split_uris=False, merged_tokens=True, whitespace_fix=True, lowercase_keywords=True)

PRESETS = {p.id: p for p in (V1, V1_1, V2_1, V3, V4)}


def get_preset(preset):
    """Resolve a preset id (or pass a :class:`CodecPreset` through)."""
    if isinstance(preset, CodecPreset):
        return preset
    try:
        return PRESETS[str(preset)]
    except KeyError:
        raise UnknownPreset(f"unknown codec preset {preset!r}; choose from {', '.join(PRESETS)}") from None
