use serde::Serialize;

use super::walk::{block_image, WalkTranscript};
use super::{NonEdgeInstance, PdtError};
use crate::bits::BitSet;
use crate::f2::{closure, safety_report, Affine, AffineRestriction, Equation, LinearForm, LinearSystem};
use crate::graph::VertexId;

/// Outcome of the extraction together with the checked postconditions.
#[derive(Debug, Clone, Serialize)]
pub struct Extraction {
    /// Blocks left free by `rho`.
    pub free: BitSet,
    pub rho: AffineRestriction,
    pub m_prime: Vec<VertexId>,
    pub rank: usize,
    pub closure: BitSet,
    /// Variables solved for in the final step, one per block.
    pub transversal: Vec<usize>,
    /// At most `rank` blocks fixed.
    pub few_blocks: bool,
    /// The system of `rho` implies `Ψ`.
    pub implies: bool,
    /// `|M'| <= 2s`, and every completion selects a clique inside `M'` joined to `M`.
    pub clique: bool,
    /// Whether the clique condition was also confirmed by enumerating completions.
    pub enumerated: bool,
}

impl Extraction {
    pub fn fixed(&self) -> usize {
        self.rho.fixed_blocks().count()
    }

    pub fn holds(&self) -> bool {
        self.few_blocks && self.implies && self.clique
    }
}

/// Completions are enumerated when at most this many free variables matter.
const ENUMERATION_LIMIT: usize = 12;

fn adjacent_to_all(inst: &NonEdgeInstance, u: VertexId, others: &[VertexId]) -> bool {
    others.iter().all(|&w| w.block == u.block || inst.has_edge(u, w))
}

/// Builds `F'`, `rho` and `M'` from a successful walk ending at a node with
/// system `psi`, for a graph with `(alpha, beta, r)` bounded common neighborhoods.
pub fn extract_restriction(
    inst: &NonEdgeInstance,
    walk: &WalkTranscript,
    psi: &LinearSystem,
    r: usize,
) -> Result<Extraction, PdtError> {
    if !walk.is_success() {
        return Err(PdtError::FailedWalk);
    }
    let layout = inst.layout();
    let (dims, bits) = (layout.dims(), layout.bits);
    let rank = psi.rank();
    if inst.m().len() + 2 * rank > r {
        return Err(PdtError::Precondition(format!("|M| + 2 rank = {} exceeds R = {r}", inst.m().len() + 2 * rank)));
    }
    let domain = inst.free_blocks();
    for e in psi.equations() {
        if let Some(b) = e.form.blocks(&layout).iter().find(|&b| !domain.contains(b)) {
            return Err(PdtError::QueryOutsideDomain(b));
        }
    }
    if !walk.l.implies_system(psi) {
        return Err(PdtError::Precondition("L does not imply the node system".into()));
    }
    let cl = closure(&layout, &psi.forms());

    // Blocks of the closure still free in the walk get vertices adjacent to M,
    // to the walk's candidates on closure blocks, and to each other.
    let mut selected: Vec<VertexId> = walk
        .c
        .iter()
        .flatten()
        .copied()
        .filter(|u| cl.contains(u.block) && !walk.free.contains(u.block))
        .collect();
    let mut xs = vec![0usize; layout.k];
    for i in cl.iter().filter(|&i| walk.free.contains(i)) {
        let y = inst
            .neighborhood_list(i)
            .iter()
            .copied()
            .find(|&y| adjacent_to_all(inst, VertexId::new(i, y), &selected))
            .ok_or_else(|| PdtError::Infeasible(format!("no vertex of block {i} completes the closure clique")))?;
        xs[i] = y;
        selected.push(VertexId::new(i, y));
    }
    for i in walk.free.iter().filter(|&i| !cl.contains(i)) {
        xs[i] = inst.neighborhood_list(i).first().copied().unwrap_or(0);
    }
    let x = walk.rho.extend(&layout.point(&xs));
    debug_assert!(psi.satisfied_by(&x));

    let mut rho = AffineRestriction::new(layout, domain.clone());
    let mut m_prime = Vec::new();
    for i in cl.iter() {
        let y = layout.block_value(&x, i);
        rho.fix_block_const(i, y)?;
        m_prime.push(VertexId::new(i, y));
    }
    let psi1 = rho.restrict(psi)?;
    let report = safety_report(&layout, &psi1.forms());
    if !report.safe {
        return Err(PdtError::Infeasible("system is not safe after fixing its closure".into()));
    }
    let transversal = report.transversal;

    // Fix all but the transversal bit of each block so both remaining
    // candidates are adjacent to everything selected so far.
    let mut around: Vec<VertexId> = inst.m().iter().copied().chain(m_prime.iter().copied()).collect();
    let mut patterns = Vec::with_capacity(transversal.len());
    for &xv in &transversal {
        let (i, j) = (layout.block_of(xv), layout.bit_of(xv));
        let cn = inst.neighborhood(i).expect("transversal blocks are in the domain");
        let mask = 1usize << (bits - 1 - j);
        let pair = (0..1usize << bits)
            .filter(|y| y & mask == 0)
            .map(|y| (VertexId::new(i, y), VertexId::new(i, y | mask)))
            .find(|&(a, b)| {
                cn.contains(a.index) && cn.contains(b.index) && adjacent_to_all(inst, a, &around) && adjacent_to_all(inst, b, &around)
            })
            .ok_or_else(|| PdtError::Infeasible(format!("no candidate pair for block {i}")))?;
        around.extend([pair.0, pair.1]);
        m_prime.extend([pair.0, pair.1]);
        patterns.push(pair.0.index);
    }

    // Substitute the fixed bits of the transversal blocks, then solve for the
    // transversal variables.
    let mut consts = BitSet::new(dims);
    let mut fixed_bits = BitSet::new(dims);
    for (&xv, &y) in transversal.iter().zip(&patterns) {
        let i = layout.block_of(xv);
        for v in layout.block_vars(i).filter(|&v| v != xv) {
            fixed_bits.insert(v);
            consts.set(v, (y >> (bits - 1 - layout.bit_of(v))) & 1 == 1);
        }
    }
    let mut rows: Vec<Equation> = psi1
        .equations()
        .iter()
        .map(|e| {
            let mut f = e.form.clone();
            let mut hit = f.0.clone();
            hit.intersect_with(&fixed_bits);
            let c = hit.dot(&consts);
            f.0.difference_with(&fixed_bits);
            Equation::new(f, e.rhs ^ c)
        })
        .collect();
    let mut pivot_row = Vec::with_capacity(transversal.len());
    for &xv in &transversal {
        let p = (0..rows.len())
            .find(|&q| !pivot_row.contains(&q) && rows[q].form.0.contains(xv))
            .ok_or_else(|| PdtError::Infeasible("transversal columns are dependent".into()))?;
        let row = rows[p].clone();
        for (q, other) in rows.iter_mut().enumerate() {
            if q != p && other.form.0.contains(xv) {
                other.form.add(&row.form);
                other.rhs ^= row.rhs;
            }
        }
        pivot_row.push(p);
    }
    for (&xv, &y) in transversal.iter().zip(&patterns) {
        let i = layout.block_of(xv);
        let row = &rows[pivot_row[transversal.iter().position(|&t| t == xv).unwrap()]];
        let mut rest = row.form.clone();
        rest.0.remove(xv);
        let exprs: Vec<Affine> = layout
            .block_vars(i)
            .map(|v| {
                if v == xv {
                    (rest.clone(), row.rhs)
                } else {
                    (LinearForm::zero(dims), (y >> (bits - 1 - layout.bit_of(v))) & 1 == 1)
                }
            })
            .collect();
        rho.fix_block(i, exprs)?;
    }

    let fixed = rho.fixed_blocks();
    let mut free = domain;
    free.difference_with(&fixed);
    let s = fixed.count();
    let few_blocks = s <= rank;
    let implies = rho.as_system().implies_system(psi);
    let mut clique = m_prime.len() <= 2 * s
        && m_prime
            .iter()
            .enumerate()
            .all(|(a, &u)| adjacent_to_all(inst, u, &m_prime[a + 1..]) && adjacent_to_all(inst, u, inst.m()));
    for i in fixed.iter() {
        clique &= block_image(&rho, i)
            .into_iter()
            .all(|y| m_prime.contains(&VertexId::new(i, y)));
    }
    let mut relevant = BitSet::new(dims);
    for v in 0..dims {
        if let Some((f, _)) = rho.expr(v) {
            relevant.union_with(&f.0);
        }
    }
    let relevant: Vec<usize> = relevant.iter().collect();
    let enumerated = relevant.len() <= ENUMERATION_LIMIT;
    if enumerated && clique {
        for w in 0..1u32 << relevant.len() {
            let point = BitSet::from_indices(dims, relevant.iter().enumerate().filter(|(t, _)| (w >> t) & 1 == 1).map(|(_, &v)| v));
            let full = rho.extend(&point);
            let picked: Vec<VertexId> = fixed.iter().map(|i| VertexId::new(i, layout.block_value(&full, i))).collect();
            clique &= picked.iter().all(|u| m_prime.contains(u))
                && picked.iter().enumerate().all(|(a, &u)| adjacent_to_all(inst, u, &picked[a + 1..]));
        }
    }
    Ok(Extraction {
        free,
        rho,
        m_prime,
        rank,
        closure: cl,
        transversal,
        few_blocks,
        implies,
        clique,
        enumerated,
    })
}
