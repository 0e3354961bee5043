"""Quick end-to-end check of the `pgg` extension module.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

import itertools

import pgg


def main() -> None:
    p = pgg.Pattern("10010*")
    assert p.eval(3) and not p.eval(1)
    assert str(pgg.Pattern.picky(2)) == "10010*"
    assert pgg.classify("110*") == [("1^+0^+", "PNE always exists, O(1)")]
    assert {c for c, _ in pgg.classify("1010*")} == {"10^+10^*", "(10)^+10^*"}

    tri = pgg.Game(3, "10*", [(0, 1), (1, 2), (0, 2)])
    assert tri.enumerate_pne() == ["001", "010", "100"]
    assert tri.is_pne("100") == (True, [])
    assert tri.is_pne("110") == (False, [0, 1])
    exists, profile, _ = tri.decide_pne()
    assert exists and tri.is_pne(profile)[0]
    assert pgg.Game.from_text(tri.to_text()) == tri

    trace = tri.run_dynamics("111", schedule="random", seed=3)
    assert trace["converged"]
    series = trace["potential_series"]
    assert all(b < a for a, b in zip(series, series[1:]))

    g = pgg.generate("gnp", 10, p="1/3", patterns=["10*", "110*"], seed=7)
    assert g == pgg.generate("gnp", 10, p="1/3", patterns=["10*", "110*"], seed=7)
    report = g.verify_isomorphism()
    assert report["first_counterexample"] is None and report["pne_sets_equal"]

    near_or = pgg.Gadget("near-or", 1, arity=2)
    result = near_or.verify("exact")
    assert result["passed"] and result["realized"] == ["01", "10"]

    sat = "p 1in3 3 1\n1 2 3\n"
    game, cert = pgg.reduce(sat, 1)
    for bits in ("100", "010", "001"):
        s = pgg.assignment_to_pne(cert, bits)
        assert game.is_pne(s)[0]
        assert pgg.pne_to_assignment(cert, s) == bits
    for bits in ("".join(t) for t in itertools.product("01", repeat=3)):
        if bits.count("1") != 1:
            try:
                pgg.assignment_to_pne(cert, bits)
            except ValueError:
                continue
            raise AssertionError(f"{bits} should be rejected")

    bottom, _ = pgg.reduce("p 1in3 1 1\n0 0 0\n", 1)
    assert bottom.decide_pne()[0] is False
    try:
        bottom.enumerate_pne()
    except pgg.CapacityError:
        pass
    else:
        raise AssertionError("enumeration above 30 vertices must be refused")

    thr = "threshold 2\ntheta 1 3/2\ntheta 2 3/2\na 1 2 1\n"
    assert pgg.threshold_to_pgg(thr).patterns == ["110*", "110*"]
    assert pgg.threshold_to_pgg(thr, rule="floor").patterns == ["10*", "10*"]

    print("smoke test passed")


if __name__ == "__main__":
    main()
