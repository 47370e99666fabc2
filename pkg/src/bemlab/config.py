"""Declarative scenario files.

Grammar (UTF-8, line oriented)::

    # comment                      (also after a value)
    [scenario NAME]                starts a scenario section
    key = value                    keys are dotted identifiers

Values are numbers (``3``, ``-1.5e-3``, ``inf``), identifiers (``T1.2ii``,
``einstein_de_sitter``, ``true``/``false``), double-quoted strings with
backslash escapes, or inline lists ``[v, v, ...]`` of those. The full key
reference lives in ``data/schema.md``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from . import models
from .errors import ConfigurationError
from .profiles import PROFILE_BUILDERS

KINDS = ("curvature", "congruence", "certificate", "rigidity", "flow", "bransdicke")
SINKS = ("certificates", "trajectory", "curvature", "diagnostics", "surface", "residuals", "comparison")
SECTION_RE = re.compile(r"\[\s*scenario\s+([A-Za-z_][A-Za-z0-9_\-]*)\s*\]\s*$")
KEY_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*")
IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-+]*")
NUMBER_START = re.compile(r"[+\-]?(\d|\.\d|inf\b)")
NUMBER_RE = re.compile(r"[+\-]?(inf|\d+\.?\d*([eE][+\-]?\d+)?|\.\d+([eE][+\-]?\d+)?)$")

RIGIDITY_TARGETS = ("rigidity", "C1.4")
BD_THEOREMS = ("T4.6", "T4.7i", "T4.7ii", "T4.8")
WEIGHT_TAGS = ("T1.1", "T1.2i", "T1.2ii")


@dataclass(frozen=True)
class ParseIssue:
    line: int
    column: int
    message: str

    def __str__(self):
        return f"line {self.line}, column {self.column}: {self.message}"


class ConfigParseError(ConfigurationError):
    """Carries every issue found, each with a 1-based line and column."""

    def __init__(self, issues):
        self.issues = tuple(issues)
        super().__init__("\n".join(str(i) for i in self.issues))


@dataclass(frozen=True)
class Check:
    name: str
    expected: object
    tol: float | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    model: dict
    weight: dict
    params: dict
    checks: tuple = ()
    outputs: tuple = ()
    line: int = 0

    def param(self, key, default=None):
        return self.params.get(key, default)


# tokenizer ------------------------------------------------------------------------


class _Cursor:
    def __init__(self, text, lineno, col0):
        self.text, self.pos, self.lineno, self.col0 = text, 0, lineno, col0

    @property
    def column(self):
        return self.col0 + self.pos + 1

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self):
        self.skip_ws()
        return self.pos >= len(self.text) or self.text[self.pos] == "#"

    def fail(self, message, col=None):
        raise ConfigParseError([ParseIssue(self.lineno, self.column if col is None else col, message)])


def _value(cur):
    cur.skip_ws()
    if cur.pos >= len(cur.text):
        cur.fail("missing value")
    ch = cur.text[cur.pos]
    col = cur.column
    if ch == "[":
        cur.pos += 1
        items = []
        cur.skip_ws()
        if cur.pos < len(cur.text) and cur.text[cur.pos] == "]":
            cur.pos += 1
            return items
        while True:
            items.append(_value(cur))
            cur.skip_ws()
            if cur.pos >= len(cur.text):
                cur.fail("unterminated list", col)
            sep = cur.text[cur.pos]
            cur.pos += 1
            if sep == "]":
                return items
            if sep != ",":
                cur.fail(f"expected ',' or ']' in list, found {sep!r}", cur.column - 1)
    if ch == '"':
        out = []
        cur.pos += 1
        while cur.pos < len(cur.text):
            c = cur.text[cur.pos]
            if c == "\\" and cur.pos + 1 < len(cur.text):
                out.append({"n": "\n", "t": "\t"}.get(cur.text[cur.pos + 1], cur.text[cur.pos + 1]))
                cur.pos += 2
                continue
            if c == '"':
                cur.pos += 1
                return "".join(out)
            out.append(c)
            cur.pos += 1
        cur.fail("unterminated string", col)
    end = cur.pos
    while end < len(cur.text) and cur.text[end] not in " \t,]#":
        end += 1
    word = cur.text[cur.pos:end]
    if NUMBER_START.match(word):
        if not NUMBER_RE.match(word):
            cur.fail(f"malformed number {word!r}", col)
        cur.pos = end
        v = float(word)
        if math.isfinite(v) and re.fullmatch(r"[+\-]?\d+", word):
            return int(word)
        return v
    if IDENT_RE.fullmatch(word):
        cur.pos = end
        if word in ("true", "false"):
            return word == "true"
        return word
    cur.fail(f"unexpected token {word!r}" if word else f"unexpected character {ch!r}", col)


def parse_sections(text):
    """``[(name, line, {key: (value, line, column)})]`` or :class:`ConfigParseError`."""
    sections = []
    issues = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        indent = len(raw) - len(raw.lstrip())
        if stripped.startswith("["):
            m = SECTION_RE.match(stripped.split("#", 1)[0].rstrip())
            if not m:
                issues.append(ParseIssue(lineno, indent + 1, "malformed section header; expected [scenario NAME]"))
                current = None
                continue
            name = m.group(1)
            if any(s[0] == name for s in sections):
                issues.append(ParseIssue(lineno, indent + 1, f"duplicate scenario {name!r}"))
            current = (name, lineno, {})
            sections.append(current)
            continue
        if "=" not in stripped:
            issues.append(ParseIssue(lineno, indent + 1, "expected 'key = value'"))
            continue
        key_part, _, rest = raw.partition("=")
        key = key_part.strip()
        if not KEY_RE.fullmatch(key):
            issues.append(ParseIssue(lineno, indent + 1, f"invalid key {key!r}"))
            continue
        if current is None:
            issues.append(ParseIssue(lineno, indent + 1, "key outside of any [scenario] section"))
            continue
        cur = _Cursor(rest, lineno, len(key_part) + 1)
        try:
            cur.skip_ws()
            vcol = cur.column
            value = _value(cur)
            if not cur.at_end():
                cur.fail(f"unexpected trailing text {cur.text[cur.pos:].strip()!r}")
        except ConfigParseError as exc:
            issues.extend(exc.issues)
            continue
        if key in current[2]:
            issues.append(ParseIssue(lineno, indent + 1, f"duplicate key {key!r}"))
            continue
        current[2][key] = (value, lineno, vcol)
    if issues:
        raise ConfigParseError(issues)
    return sections


# validation -----------------------------------------------------------------------


REQUIRED = {
    "curvature": ("model",),
    "congruence": ("model", "t0", "tmax"),
    "certificate": ("model", "theorems", "slices"),
    "rigidity": ("model", "slices"),
    "flow": ("model", "s_max"),
    "bransdicke": ("omega", "theorems"),
}


_CERT_KEYS = ("theorems", "slices", "directions", "compact", "cauchy", "k_mode", "complete")
KIND_KEYS = {
    "curvature": ("times", "betas"),
    "congruence": ("t0", "tmax", "H0", "k"),
    "certificate": _CERT_KEYS,
    "rigidity": _CERT_KEYS,
    "flow": ("n_pts", "base", "amplitude", "mode", "c", "s_max", "dt", "record_every"),
    "bransdicke": ("omega", "potential", "eos", "rho0", "a0", "phi0", "dphi0", "t0", "t_span", "kappa", "slice",
                   "theorems", "residual_samples"),
}
COMMON_KEYS = ("kind", "model", "weight", "outputs")


def _grouped(entries, prefix):
    """Split ``prefix = name`` and ``prefix.param = v`` entries."""
    head = entries.get(prefix)
    params = {k[len(prefix) + 1:]: v[0] for k, v in entries.items() if k.startswith(prefix + ".")}
    return (None if head is None else head[0]), params


def _as_list(v):
    return list(v) if isinstance(v, list) else [v]


def _issue(entries, key, message, fallback_line):
    if key in entries:
        _, line, col = entries[key]
        return ParseIssue(line, col, message)
    return ParseIssue(fallback_line, 1, message)


def _validate(name, line, entries):
    issues = []
    kind = entries.get("kind", (None,))[0]
    if kind not in KINDS:
        issues.append(_issue(entries, "kind", f"unknown kind {kind!r}; valid: {', '.join(KINDS)}", line))
        return None, issues
    for req in REQUIRED[kind]:
        if req not in entries:
            issues.append(ParseIssue(line, 1, f"scenario {name!r} of kind {kind} needs {req!r}"))

    allowed_keys = COMMON_KEYS + KIND_KEYS[kind]
    for key, (_, kline, kcol) in entries.items():
        head = key.split(".", 1)[0]
        if head == "check" or key in allowed_keys or (head in ("model", "weight", "potential") and head in allowed_keys):
            continue
        issues.append(ParseIssue(kline, kcol, f"unknown key {key!r} for kind {kind}; valid: {', '.join(allowed_keys)}"))

    model_name, model_params = _grouped(entries, "model")
    if kind != "bransdicke" and model_name is not None:
        valid = sorted(models.MODELS) + ["warped"]
        if model_name not in valid:
            issues.append(_issue(entries, "model", f"unknown model {model_name!r}; valid: {', '.join(valid)}", line))
        elif model_name == "warped":
            scale = model_params.get("scale")
            if scale not in PROFILE_BUILDERS:
                issues.append(_issue(entries, "model.scale",
                                     f"unknown profile {scale!r}; valid: {', '.join(sorted(PROFILE_BUILDERS))}", line))
    weight_name, weight_params = _grouped(entries, "weight")
    if weight_name is not None:
        valid = sorted(set(models.WEIGHTS) | set(PROFILE_BUILDERS))
        if weight_name not in valid:
            issues.append(_issue(entries, "weight", f"unknown weight {weight_name!r}; valid: {', '.join(valid)}", line))

    if "theorems" in entries:
        allowed = BD_THEOREMS if kind == "bransdicke" else WEIGHT_TAGS + RIGIDITY_TARGETS
        for tag in _as_list(entries["theorems"][0]):
            if tag not in allowed:
                issues.append(_issue(entries, "theorems",
                                     f"unknown theorem {tag!r}; valid: {', '.join(allowed)}", line))
    if kind == "bransdicke":
        pot, _ = _grouped(entries, "potential")
        from .bransdicke import POTENTIALS

        if pot is not None and pot not in POTENTIALS:
            issues.append(_issue(entries, "potential",
                                 f"unknown potential {pot!r}; valid: {', '.join(sorted(POTENTIALS))}", line))
    for key in ("directions",):
        for d in _as_list(entries.get(key, (["future"],))[0]):
            if d not in ("future", "past"):
                issues.append(_issue(entries, key, f"direction must be future or past, got {d!r}", line))
    outputs = tuple(_as_list(entries.get("outputs", ([],))[0]))
    for o in outputs:
        if o not in SINKS:
            issues.append(_issue(entries, "outputs", f"unknown sink {o!r}; valid: {', '.join(SINKS)}", line))

    checks = {}
    tols = {}
    for key, (value, kline, kcol) in entries.items():
        if not key.startswith("check."):
            continue
        cname = key[len("check."):]
        if cname.endswith(".tol"):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                issues.append(ParseIssue(kline, kcol, f"tolerance for {cname[:-4]!r} must be a number"))
                continue
            tols[cname[:-4]] = float(value)
        else:
            checks[cname] = value
    for cname in tols:
        if cname not in checks:
            issues.append(_issue(entries, f"check.{cname}.tol", f"tolerance given for undeclared check {cname!r}", line))

    reserved = {"kind", "model", "weight", "outputs"}
    params = {k: v[0] for k, v in entries.items()
              if k not in reserved and not k.startswith(("model.", "weight.", "check."))}
    scen = Scenario(name, kind, {"name": model_name, **model_params}, {"name": weight_name, **weight_params},
                    params, tuple(Check(c, v, tols.get(c)) for c, v in checks.items()), outputs, line)
    if not issues:
        issues.extend(_build_issues(scen, entries, line))
    return scen, issues


def _build_issues(scen, entries, line):
    """Construct the model objects once so parameter errors surface at parse time."""
    from .runner import build_geometry, build_weight_profile

    if scen.kind == "bransdicke":
        return []
    try:
        build_geometry(scen)
        build_weight_profile(scen)
    except (ConfigurationError, TypeError, ValueError) as exc:
        return [_issue(entries, "model", f"cannot build model: {exc}", line)]
    return []


def parse_config(text):
    """Parse and validate scenario text; raises :class:`ConfigParseError` on any issue."""
    sections = parse_sections(text)
    scenarios, issues = [], []
    for name, line, entries in sections:
        scen, found = _validate(name, line, entries)
        issues.extend(found)
        if scen is not None:
            scenarios.append(scen)
    if issues:
        raise ConfigParseError(sorted(issues, key=lambda i: (i.line, i.column)))
    return scenarios


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
