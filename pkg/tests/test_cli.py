"""End-to-end runs of the command line front end."""

import json
import os

import pytest

from spinchain.cli import main


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


def header_lines(path):
    with open(path) as fh:
        return [ln.rstrip("\n") for ln in fh if ln.startswith("#")]


def test_terms_writes_both_tables(tmp_path):
    out = str(tmp_path)
    rc = main(["--experiment", "terms", "--smax", "3", "--out", out])
    assert rc == 0
    terms = os.path.join(out, "fig2_terms.csv")
    appendix = os.path.join(out, "appendixA.csv")
    assert os.path.exists(terms) and os.path.exists(appendix)
    heads = header_lines(terms)
    assert any(h.startswith("# params: ") for h in heads)
    assert any(h.startswith("# seed: ") for h in heads)
    with open(terms) as fh:
        body = [ln for ln in fh if not ln.startswith("#")]
    assert body[0].strip() == "two_s,mapping,n_terms,n_multiqubit"
    assert len(body) == 1 + 3 * 4  # smax rows times four mappings
    fit_heads = [h for h in header_lines(appendix) if h.startswith("# fit_")]
    assert len(fit_heads) == 2


def test_evolve_default_name_and_reproducibility(tmp_path):
    out1 = str(tmp_path / "a")
    out2 = str(tmp_path / "b")
    argv = ["--experiment", "evolve", "--spin", "1", "--steps", "2",
            "--shots", "64", "--seed", "7", "--out"]
    assert main(argv + [out1]) == 0
    assert main(argv + [out2]) == 0
    p1 = os.path.join(out1, "populations.csv")
    p2 = os.path.join(out2, "populations.csv")
    assert read(p1) == read(p2)
    with open(p1) as fh:
        body = [ln.strip() for ln in fh if not ln.startswith("#")]
    assert body[0] == "n_st,t,p0_exact,p0,sigma_p0"
    assert len(body) == 4  # header plus N_ST = 0, 1, 2
    first = body[1].split(",")
    assert float(first[1]) == 0.0 and float(first[3]) == 1.0


def test_evolve_figure_names_per_spin(tmp_path):
    out = str(tmp_path)
    assert main(["--experiment", "evolve", "--spin", "2", "--steps", "1",
                 "--out", out]) == 0
    assert os.path.exists(os.path.join(out, "fig4_populations.csv"))
    assert main(["--experiment", "evolve", "--spin", "3", "--steps", "1",
                 "--out", out]) == 0
    assert os.path.exists(os.path.join(out, "fig5_populations.csv"))


def test_evolve_noise_column(tmp_path):
    out = str(tmp_path)
    rc = main(["--experiment", "evolve", "--spin", "1", "--steps", "2",
               "--noise", "1e-3", "--out", out])
    assert rc == 0
    with open(os.path.join(out, "populations.csv")) as fh:
        body = [ln.strip() for ln in fh if not ln.startswith("#")]
    assert body[0] == "n_st,t,p0_exact,p0,p0_noisy,eps_bar"
    eps = {row.split(",")[-1] for row in body[1:]}
    assert len(eps) == 1  # same average error stamped on every row


def test_chain4_exit_codes_and_output(tmp_path):
    out = str(tmp_path)
    assert main(["--experiment", "chain4", "--mapping", "compact",
                 "--out", out]) == 2
    assert main(["--experiment", "chain4", "--spin", "7", "--out", out]) == 3
    rc = main(["--experiment", "chain4", "--spin", "1", "--steps", "2",
               "--out", out])
    assert rc == 0
    path = os.path.join(out, "fig6_correlator.csv")
    with open(path) as fh:
        body = [ln.strip() for ln in fh if not ln.startswith("#")]
    assert body[0] == "n_st,t,corr_raw,corr_norm,p_sector,corr_exact,corr_pt2"
    first = body[1].split(",")
    assert float(first[2]) == pytest.approx(-1.0)  # scaled by s^2
    assert float(first[4]) == pytest.approx(1.0)


def test_scaling_small_spin_skips_stepsize_fit(tmp_path):
    out = str(tmp_path)
    rc = main(["--experiment", "scaling", "--spin", "2", "--out", out])
    assert rc == 0
    with open(os.path.join(out, "fig7_fits.json")) as fh:
        fits = json.load(fh)
    assert set(fits["per_spin"]) == {"1", "2"}
    assert "c" not in fits  # needs data at 2S >= 4
    assert fits["per_spin"]["2"]["slope"] == pytest.approx(-2.0, abs=0.2)
    with open(os.path.join(out, "fig7_discrepancy.csv")) as fh:
        body = [ln for ln in fh if not ln.startswith("#")]
    assert len(body) == 1 + 2 * 6  # two spins, six step counts


def test_scaling_noise_branch(tmp_path):
    out = str(tmp_path)
    rc = main(["--experiment", "scaling", "--spin", "1", "--noise", "1e-3",
               "--out", out])
    assert rc == 0
    assert os.path.exists(os.path.join(out, "fig8_discrepancy.csv"))
    with open(os.path.join(out, "fig8_fits.json")) as fh:
        fits = json.load(fh)
    assert fits["two_s"] == 1


def test_validation_exit_code(tmp_path):
    out = str(tmp_path)
    assert main(["--experiment", "evolve", "--spin", "0", "--out", out]) == 2
    assert main(["--experiment", "evolve", "--noise", "1.5", "--out", out]) == 2
    assert main(["--experiment", "plot", "--out", out]) == 2  # missing --infile


def test_plot_svg_is_deterministic(tmp_path):
    out = str(tmp_path)
    assert main(["--experiment", "evolve", "--spin", "1", "--steps", "2",
                 "--out", out]) == 0
    csv = os.path.join(out, "populations.csv")
    assert main(["--experiment", "plot", "--infile", csv]) == 0
    svg = os.path.join(out, "populations.svg")
    assert os.path.exists(svg)
    first = read(svg)
    assert main(["--experiment", "plot", "--infile", csv]) == 0
    assert read(svg) == first
    assert first.lstrip().startswith(b"<?xml")
