import math
import os
import sys

mod_dir = os.environ.get("STTRACE_MODULE_DIR")
if mod_dir:
    sys.path.insert(0, mod_dir)

try:
    import sttrace as st
except ImportError:
    import _sttrace as st


def test_problem_names():
    names = st.problems()
    assert "shrinking_sphere" in names
    assert "shrinking_sphere_exp" in names
    assert "dziuk_moving" in names
    assert "static_sphere" in names
    assert "expanding_sphere" in names


def test_mesh_info():
    info = st.mesh_info(0.5)
    assert info["cells"] == (8, 8, 8)
    assert info["n_vertices"] == 9**3
    assert info["n_tets"] == 6 * 8**3


def test_static_sphere_geometry():
    area = st.cross_section_area("static_sphere", 0.5, 0.0)
    assert abs(area - 4.0 * math.pi) < 0.35
    measure = st.slab_surface_measure("static_sphere", 0.5, 0.5, 1.0, slab=1)
    assert abs(measure - 0.5 * area) < 1e-10


def test_run_and_orders(tmp_path):
    out = st.run(
        {
            "problem": "static_sphere",
            "h": 0.5,
            "dt": 0.5,
            "t_end": 1.0,
            "outputs": str(tmp_path / "out"),
        }
    )
    assert out["n_slabs"] == 2
    assert out["err_l2_final"] < 1e-8
    assert out["mass_abs_err"] < 1e-8
    assert (tmp_path / "out" / "run_summary.csv").exists()
    assert (tmp_path / "out" / "mass.csv").exists()

    orders = st.observed_order([4.0, 2.0, 1.0])
    assert orders == [1.0, 1.0]


def test_bad_config_raises():
    try:
        st.run({"problem": "no_such_problem"})
    except RuntimeError as err:
        assert "config_error" in str(err)
    else:
        raise AssertionError("expected a config_error")
