use pynatanzon::pynatanzon;
use pyo3::ffi::c_str;
use pyo3::prelude::*;

#[test]
fn module_runs_inside_embedded_interpreter() {
    pyo3::append_to_inittab!(pynatanzon);
    Python::initialize();
    Python::attach(|py| {
        py.run(
            c_str!(
                r#"
import pynatanzon as nz
osc = nz.ConfluentSpec(0.0, 4.0, 0.0, 4.0, 0.0, 0.0)
levels = nz.solve_levels(osc, 2)
assert [round(s.energy, 9) for s in levels] == [2.0, 4.0, 6.0], levels
t = nz.potential_table(osc, (1e-6, 10.0), 401, u0=1.0, xi0=0.5)
assert len(t["Vtotal"]) == 401
try:
    nz.potential_table(osc, (1e-6, 10.0), 401, mode="nonsense")
except ValueError:
    pass
else:
    raise AssertionError("bad mode accepted")
repulsive = nz.ConfluentSpec(0.0, 4.0, 0.0, -4.0, 0.0, 0.0)
assert all(s is None for s in nz.solve_levels(repulsive, 1))
try:
    nz.validate(repulsive, (1e-6, 10.0), 401)
except nz.NatanzonError:
    pass
else:
    raise AssertionError("validation without bound states succeeded")
"#
            ),
            None,
            None,
        )
        .unwrap();
    });
}
