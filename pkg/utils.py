from fractions import Fraction
from typing import Optional, Union

from exceptions import MalformedInputException


def parse_rational(value: Union[str, int, Fraction, None]) -> Optional[Fraction]:
    """
    Разбор рационального числа из строки вида "p/q" или "p"
    """
    if value is None:
        return None
    if isinstance(value, bool):
        raise MalformedInputException(f"Not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            value = value.replace(" ", "")
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise MalformedInputException(f"Not a rational: {value!r}")
    raise MalformedInputException(f"Not a rational: {value!r}")


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def sign_of(value: Fraction) -> int:
    return (value > 0) - (value < 0)
