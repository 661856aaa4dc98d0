import re
from typing import Optional

DURATION_PATTERN = re.compile(
    r"^(?:(\d+(?:\.\d+)?)h)?(?:(\d+(?:\.\d+)?)m(?!s))?(?:(\d+(?:\.\d+)?)s?)?$"
)


def duration_from_str(dur_str: str) -> float:
    """
    Converts 1h2m3.5s, 2m, 90s or a bare number of seconds to seconds
    :param dur_str:
    :return:
    """
    text = dur_str.strip()
    m = DURATION_PATTERN.match(text)
    if not text or not m or not any(m.groups()):
        raise ValueError("Invalid duration format: " + dur_str)
    hours, minutes, seconds = (float(g) if g else 0.0 for g in m.groups())
    return hours * 3600 + minutes * 60 + seconds


def duration_to_str(seconds: Optional[float]) -> str:
    if seconds is None:
        return "n/a"
    if seconds < 60:
        return "{:.3f}s".format(seconds)
    m, s = divmod(seconds, 60)
    h, m = divmod(m, 60)
    if h > 0:
        return "%dh%02dm%06.3fs" % (h, m, s)
    return "%dm%06.3fs" % (m, s)


def number_to_str(value: Optional[float], digits: int = 4) -> str:
    if value is None:
        return "n/a"
    return "{:.{}g}".format(value, digits)
