"""Instance generators and the JSON file formats.

Rationals are written as ``"num/den"`` strings (integers as plain digit
strings) and infinite prices as ``"inf"``, so files round-trip exactly.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import InvariantError, ParseError
from .model import (
    INF,
    Instance,
    LotteryMenu,
    RandomItemPricing,
    TypeDistribution,
    validate_instance,
    validate_menu,
    validate_random_pricing,
)

STYLES = ("independent", "comonotone", "antithetic")


@dataclass(frozen=True)
class GapInstance:
    instance: Instance
    menu: LotteryMenu
    analytic_profit: Fraction  # per-type profit 2^(i-1) summed against 2^-i

    @property
    def m(self) -> int:
        return self.instance.m

    @property
    def distribution(self) -> TypeDistribution:
        return self.instance.buyers[0]

    @property
    def costs(self) -> tuple:
        return self.instance.costs


def gap_instance(m: int, eps=0) -> GapInstance:
    """Single buyer, costs (0, m, ..., m); type i values item 1 at 2^i and item i at m.

    Option i sells items 1 and i with probability 1/2 each for 2^(i-1) + m/2 - eps.
    """
    if m < 2:
        raise ValueError("gap instance needs m >= 2")
    eps = Fraction(eps)
    values, probs, options = [], [], []
    for i in range(2, m + 1):
        v = [0] * m
        v[0], v[i - 1] = 2**i, m
        values.append(v)
        probs.append(Fraction(1, 2**i))
        lam = [Fraction(0)] * m
        lam[0] = lam[i - 1] = Fraction(1, 2)
        options.append((lam, 2 ** (i - 1) + Fraction(m, 2) - eps))
    values.append([0] * m)
    probs.append(1 - sum(probs))
    d = TypeDistribution(values, probs)
    inst = Instance(m, (d,), costs=[0] + [m] * (m - 1))
    return GapInstance(inst, LotteryMenu(tuple(options), m), Fraction(m - 1, 2))


def _grid_value(rng, scale):
    # half-integer grid on [0, scale]
    return Fraction(rng.randint(0, 2 * scale), 2)


def random_distribution(rng: random.Random, m: int, support: int, scale: int = 8,
                        style: str = "independent") -> TypeDistribution:
    if style not in STYLES:
        raise ValueError(f"unknown style {style!r}; expected one of {STYLES}")
    mult = [Fraction(rng.randint(1, 4), 2) for _ in range(m)]
    values = []
    for _ in range(support):
        if style == "independent":
            v = [_grid_value(rng, scale) for _ in range(m)]
        elif style == "comonotone":
            level = Fraction(rng.randint(0, scale))
            v = [min(Fraction(scale), level * a) for a in mult]
        else:
            level = _grid_value(rng, scale)
            v = [level if j % 2 == 0 else scale - level for j in range(m)]
        values.append(v)
    weights = [rng.randint(1, 6) for _ in range(support)]
    total = sum(weights)
    return TypeDistribution(values, [Fraction(w, total) for w in weights])


def random_instance(n: int, m: int, support: int, scale: int = 8, style: str = "independent",
                    seed: int = 0, costs: bool = False) -> Instance:
    """Deterministic in ``seed``; values lie on the half-integer grid of [0, scale]."""
    if n < 1 or m < 1 or support < 1 or scale < 1:
        raise ValueError("dimensions must be positive")
    rng = random.Random(seed)
    buyers = tuple(random_distribution(rng, m, support, scale, style) for _ in range(n))
    c = [_grid_value(rng, max(1, scale // 2)) for _ in range(m)] if costs else None
    return Instance(m, buyers, c)


def random_menu(m: int, options: int, seed: int = 0, scale: int = 8) -> LotteryMenu:
    """Random lotteries (denominators up to 4) at random grid prices; not necessarily buy-many."""
    rng = random.Random(seed)
    opts = []
    for _ in range(options):
        lam = [Fraction(0)] * m
        budget = Fraction(1)
        for j in rng.sample(range(m), rng.randint(1, m)):
            x = min(budget, Fraction(rng.randint(1, 4), 4))
            lam[j] = x
            budget -= x
            if budget == 0:
                break
        opts.append((lam, Fraction(rng.randint(1, 4 * scale), 2)))
    return LotteryMenu(tuple(opts), m)


# -- serialization ---------------------------------------------------------


def fmt(x) -> str:
    if x == INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _parse_rational(s, where: str, allow_inf: bool = False):
    if allow_inf and isinstance(s, str) and s.strip().lower() == "inf":
        return INF
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise ParseError(f"{where}: expected a rational string, got {s!r}")
    try:
        return Fraction(s.strip() if isinstance(s, str) else s)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{where}: invalid rational {s!r}") from None


def _field(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    return obj[key]


def _list(obj, where):
    if not isinstance(obj, list):
        raise ParseError(f"{where}: expected a list")
    return obj


def instance_to_dict(inst: Instance) -> dict:
    out = {"m": inst.m}
    if inst.costs is not None:
        out["costs"] = [fmt(c) for c in inst.costs]
    out["buyers"] = [
        {"types": [{"values": [fmt(x) for x in v], "prob": fmt(p)} for v, p in d]}
        for d in inst.buyers
    ]
    return out


def instance_from_dict(obj, validate: bool = True) -> Instance:
    m = _field(obj, "m", "instance")
    if not isinstance(m, int) or isinstance(m, bool):
        raise ParseError("m: expected an integer")
    buyers = []
    for i, b in enumerate(_list(_field(obj, "buyers", "instance"), "buyers")):
        values, probs = [], []
        for t, ty in enumerate(_list(_field(b, "types", f"buyers[{i}]"), f"buyers[{i}].types")):
            where = f"buyers[{i}].types[{t}]"
            vals = _list(_field(ty, "values", where), where + ".values")
            values.append([_parse_rational(x, f"{where}.values[{j}]") for j, x in enumerate(vals)])
            probs.append(_parse_rational(_field(ty, "prob", where), where + ".prob"))
        buyers.append(TypeDistribution(values, probs))
    costs = None
    if "costs" in obj and obj["costs"] is not None:
        costs = [_parse_rational(x, f"costs[{j}]") for j, x in enumerate(_list(obj["costs"], "costs"))]
    inst = Instance(m, tuple(buyers), costs)
    if validate:
        problems = validate_instance(inst)
        if problems:
            raise InvariantError(problems)
    return inst


def menu_to_dict(menu: LotteryMenu) -> dict:
    return {"m": menu.m, "options": [{"lottery": [fmt(x) for x in lam], "price": fmt(p)} for lam, p in menu]}


def menu_from_dict(obj, validate: bool = True) -> LotteryMenu:
    opts = []
    for k, o in enumerate(_list(_field(obj, "options", "menu"), "options")):
        where = f"options[{k}]"
        lam = [_parse_rational(x, f"{where}.lottery[{j}]")
               for j, x in enumerate(_list(_field(o, "lottery", where), where + ".lottery"))]
        opts.append((lam, _parse_rational(_field(o, "price", where), where + ".price")))
    m = obj.get("m", -1) if isinstance(obj, dict) else -1
    try:
        menu = LotteryMenu(tuple(opts), m)
    except ValueError as e:
        raise ParseError(f"menu: {e}") from None
    if validate:
        problems = validate_menu(menu)
        if problems:
            raise InvariantError(problems)
    return menu


def pricing_to_list(rp: RandomItemPricing) -> list:
    return [{"prices": [fmt(x) for x in p], "weight": fmt(w)} for p, w in rp]


def pricing_from_list(obj, where: str = "pricing") -> RandomItemPricing:
    atoms = []
    for k, a in enumerate(_list(obj, where)):
        w = f"{where}[{k}]"
        ps = [_parse_rational(x, f"{w}.prices[{j}]", allow_inf=True)
              for j, x in enumerate(_list(_field(a, "prices", w), w + ".prices"))]
        atoms.append((ps, _parse_rational(_field(a, "weight", w), w + ".weight")))
    rp = RandomItemPricing(tuple(atoms))
    problems = validate_random_pricing(rp)
    if problems:
        raise InvariantError([f"{where}: {p}" for p in problems])
    return rp


def sequential_to_dict(seq) -> dict:
    return {"order": list(seq.order), "pricings": [pricing_to_list(rp) for rp in seq.pricings]}


def sequential_from_dict(obj):
    from .sequential import SequentialPricing

    order = _list(_field(obj, "order", "sequential"), "order")
    if not all(isinstance(i, int) and not isinstance(i, bool) for i in order):
        raise ParseError("order: expected integers")
    pricings = [pricing_from_list(p, f"pricings[{i}]")
                for i, p in enumerate(_list(_field(obj, "pricings", "sequential"), "pricings"))]
    try:
        return SequentialPricing(tuple(order), tuple(pricings))
    except ValueError as e:
        raise ParseError(f"sequential: {e}") from None


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ParseError(f"{path}: {e.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: line {e.lineno}: {e.msg}") from None


def _write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def read_instance(path) -> Instance:
    return instance_from_dict(_read_json(path))


def write_instance(inst: Instance, path) -> None:
    _write_json(instance_to_dict(inst), path)


def read_menu(path) -> LotteryMenu:
    return menu_from_dict(_read_json(path))


def write_menu(menu: LotteryMenu, path) -> None:
    _write_json(menu_to_dict(menu), path)


def read_sequential(path):
    return sequential_from_dict(_read_json(path))


def write_sequential(seq, path) -> None:
    _write_json(sequential_to_dict(seq), path)
