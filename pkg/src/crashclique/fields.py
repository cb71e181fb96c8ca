"""Prime-field helpers shared by the codec and the wire format."""
from __future__ import annotations


def is_prime(x: int) -> bool:
    if x < 2:
        return False
    if x < 4:
        return True
    if x % 2 == 0:
        return False
    f = 3
    while f * f <= x:
        if x % f == 0:
            return False
        f += 2
    return True


def smallest_prime_geq(n: int) -> int:
    """Smallest prime p with p >= n. Bertrand guarantees p < 2n for n > 1."""
    if n <= 2:
        return 2
    p = n if n % 2 else n + 1
    while not is_prime(p):
        p += 2
    return p


def inv_mod(a: int, p: int) -> int:
    return pow(a, p - 2, p)


def word_bits_for(p: int) -> int:
    """Bits needed to hold one field symbol; the per-word budget of a message."""
    return max(1, (p - 1).bit_length())
