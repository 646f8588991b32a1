"""Small dotted-quad helpers. IPv4 only."""

from functools import lru_cache


@lru_cache(maxsize=1 << 16)
def ip_to_int(ip: str) -> int:
    parts = ip.split(".")
    if len(parts) != 4:
        raise ValueError(f"not an IPv4 address: {ip!r}")
    value = 0
    for part in parts:
        # reject '', '+1', ' 1', '01x' and leading zeros like '010'
        if not part.isdigit() or not part.isascii() or (len(part) > 1 and part[0] == "0"):
            raise ValueError(f"not an IPv4 address: {ip!r}")
        octet = int(part)
        if octet > 255:
            raise ValueError(f"not an IPv4 address: {ip!r}")
        value = (value << 8) | octet
    return value


def int_to_ip(value: int) -> str:
    return f"{value >> 24 & 255}.{value >> 16 & 255}.{value >> 8 & 255}.{value & 255}"


def is_ipv4(text: str) -> bool:
    try:
        ip_to_int(text)
    except ValueError:
        return False
    return True


def mask_of(length: int) -> int:
    return (0xFFFFFFFF << (32 - length)) & 0xFFFFFFFF if length else 0
