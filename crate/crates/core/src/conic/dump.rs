//! Plain-text problem dump, one block per constraint.
//!
//! ```text
//! sepcert-conic 1
//! coords <n>
//! var <id> <label> <shape> <offset>        shape: scalar | herm:2x2 | sym:4
//! objective <nnz>
//! <coord> <value>                          (maximised)
//! constraint <id> <label> <cone> <rows>    cone: zero | nonneg | herm:2x2 | sym:4
//! a <nnz>
//! <row> <coord> <value>
//! k <nnz>
//! <row> <value>
//! end
//! ```
//!
//! Coordinates are global (variable offset added); the constraint reads
//! `A x + k ∈ cone` with rows in the Hermitian / symmetric basis order.
//! Values use `{:e}` so they round-trip exactly.

use std::io::{self, Write};

use super::{ConeKind, SdpProblem, VarShape};

fn label(s: &str) -> String {
    let s: String = s.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}

fn dims(d: &[usize]) -> String {
    d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("x")
}

pub(super) fn write<W: Write>(p: &SdpProblem, mut w: W) -> io::Result<()> {
    writeln!(w, "sepcert-conic 1")?;
    writeln!(w, "coords {}", p.num_coords())?;
    for (i, v) in p.variables().iter().enumerate() {
        let shape = match &v.shape {
            VarShape::Scalar => "scalar".to_string(),
            VarShape::Hermitian(d) => format!("herm:{}", dims(d)),
            VarShape::Symmetric(n) => format!("sym:{n}"),
        };
        writeln!(w, "var {i} {} {shape} {}", label(&v.label), v.offset)?;
    }
    writeln!(w, "objective {}", p.objective().len())?;
    for &(v, c, x) in p.objective() {
        writeln!(w, "{} {x:e}", p.offset(v) + c)?;
    }
    for (i, c) in p.constraints().iter().enumerate() {
        let cone = match &c.kind {
            ConeKind::Zero => "zero".to_string(),
            ConeKind::Nonneg => "nonneg".to_string(),
            ConeKind::HermitianPsd(d) => format!("herm:{}", dims(d)),
            ConeKind::SymmetricPsd(n) => format!("sym:{n}"),
        };
        writeln!(w, "constraint {i} {} {cone} {}", label(&c.label), c.rows)?;
        let nnz: usize = c.terms.iter().map(|t| t.entries.len()).sum();
        writeln!(w, "a {nnz}")?;
        for t in &c.terms {
            let off = p.offset(t.var);
            for &(r, col, x) in &t.entries {
                writeln!(w, "{r} {} {x:e}", off + col)?;
            }
        }
        let k: Vec<(usize, f64)> = c
            .constant
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, x)| *x != 0.0)
            .collect();
        writeln!(w, "k {}", k.len())?;
        for (r, x) in k {
            writeln!(w, "{r} {x:e}")?;
        }
        writeln!(w, "end")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn dump_lists_every_block() {
        let mut p = SdpProblem::new();
        let t = p.add_scalar("t");
        let x = p.add_hermitian("tau 0", vec![2]);
        p.require_psd(x).unwrap();
        p.add_constraint(
            "trace",
            ConeKind::Zero,
            1,
            vec![
                Term {
                    var: x,
                    entries: vec![(0, 0, 1.0), (0, 1, 1.0)],
                },
                Term {
                    var: t,
                    entries: vec![(0, 0, -1.0)],
                },
            ],
            vec![0.0],
        )
        .unwrap();
        p.set_objective(vec![(t, 0, 1.0)]).unwrap();
        let mut buf = Vec::new();
        p.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("sepcert-conic 1\ncoords 5\n"));
        assert!(text.contains("var 1 tau_0 herm:2 1"));
        assert!(text.contains("constraint 1 trace zero 1\na 3\n0 1 1e0\n0 2 1e0\n0 0 -1e0\nk 0\nend"));
        assert_eq!(text.matches("end\n").count(), 2);
    }
}
