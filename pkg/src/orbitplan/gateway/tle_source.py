"""Where element sets come from: a remote provider, a local file, or inline lines."""

from __future__ import annotations

import logging
import os
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

from orbitplan.errors import RequestError, SatelliteNotFoundError, TleError, TleProviderError
from orbitplan.orbitcore import Tle, parse_tle

log = logging.getLogger(__name__)

DEFAULT_URL_TEMPLATE = "https://celestrak.org/NORAD/elements/gp.php?CATNR={norad}&FORMAT=TLE"
URL_ENV = "ORBITPLAN_TLE_URL"


class TleSource(Protocol):
    remote: bool

    def fetch(self, norad: int | None) -> Tle: ...


def parse_tle_text(text: str) -> list[Tle]:
    """All element sets in a 2-line or 3-line (title + 2 lines) text block."""
    lines = [ln.rstrip() for ln in text.splitlines() if ln.strip()]
    out = []
    name = ""
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith("1 ") and i + 1 < len(lines) and lines[i + 1].startswith("2 "):
            out.append(parse_tle(line, lines[i + 1], name))
            name = ""
            i += 2
            continue
        if name:
            raise TleError(f"unexpected line in element-set text: {line!r}")
        name = line[2:] if line.startswith("0 ") else line
        i += 1
    if name:
        raise TleError(f"title line {name!r} is not followed by an element set")
    return out


def _select(tles: list[Tle], norad: int | None, origin: str) -> Tle:
    if norad is None:
        if len(tles) == 1:
            return tles[0]
        raise RequestError(f"{origin} holds {len(tles)} element sets; a catalog number is required")
    for tle in tles:
        if tle.catalog_number == norad:
            return tle
    raise SatelliteNotFoundError(f"catalog number {norad} not found in {origin}")


@dataclass(frozen=True)
class FileTleSource:
    path: Path
    remote: bool = field(default=False, init=False)

    def fetch(self, norad: int | None) -> Tle:
        try:
            text = Path(self.path).read_text()
        except OSError as exc:
            raise RequestError(f"cannot read TLE file {self.path}: {exc.strerror}") from None
        return _select(parse_tle_text(text), norad, str(self.path))


@dataclass(frozen=True)
class InlineTleSource:
    line1: str
    line2: str
    name: str = ""
    remote: bool = field(default=False, init=False)

    def fetch(self, norad: int | None) -> Tle:
        return _select([parse_tle(self.line1, self.line2, self.name)], norad, "inline element set")


@dataclass
class RemoteTleSource:
    """HTTP GET against a provider URL template containing ``{norad}``."""

    url_template: str = ""
    timeout: float = 5.0
    retries: int = 2
    backoff: float = 1.0
    opener: Callable = urllib.request.urlopen
    sleep: Callable[[float], None] = time.sleep
    remote: bool = field(default=True, init=False)

    def __post_init__(self):
        if not self.url_template:
            self.url_template = os.environ.get(URL_ENV, DEFAULT_URL_TEMPLATE)
        if "{norad}" not in self.url_template:
            raise RequestError("TLE provider URL template must contain '{norad}'")

    def _get(self, url: str) -> str:
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                self.sleep(self.backoff)
            try:
                with self.opener(url, timeout=self.timeout) as resp:
                    return resp.read().decode("utf-8", errors="replace")
            except urllib.error.HTTPError as exc:
                if exc.code == 404:
                    return ""
                last = exc
            except (urllib.error.URLError, OSError) as exc:
                last = exc
            log.warning("TLE fetch attempt %d for %s failed: %s", attempt + 1, url, last)
        raise TleProviderError(f"TLE provider unreachable after {self.retries + 1} attempts: {last}")

    def fetch(self, norad: int | None) -> Tle:
        if norad is None:
            raise RequestError("a catalog number is required for remote TLE lookup")
        text = self._get(self.url_template.format(norad=norad))
        if not text.strip() or "no gp data found" in text.lower():
            raise SatelliteNotFoundError(f"provider has no element set for catalog number {norad}")
        try:
            tles = parse_tle_text(text)
        except TleError as exc:
            raise TleProviderError(f"malformed provider response: {exc}") from None
        if not tles:
            raise TleProviderError("provider response holds no element set")
        return _select(tles, norad, "provider response")
