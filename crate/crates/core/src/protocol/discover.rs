use super::{ProtocolConfig, ProtocolResult, ProtocolStatus, SyndromeFlags, TrialRunner};
use crate::channels::KrausChannel;
use crate::qmath::{eigh, hermitian_part, CMatrix, Ket, Subspace};
use crate::tomography::TrialSettings;
use crate::Result;

struct Group {
    span: Subspace,
    complete: bool,
}

impl Group {
    fn absorb(&mut self, v: &Ket, config: &ProtocolConfig) -> Result<()> {
        let (residual, _) = self.span.extend(v.amplitudes(), config.gs_null_threshold)?;
        if residual < config.gs_null_threshold {
            self.complete = true;
        }
        Ok(())
    }
}

/// Largest squared cosine between a vector of `a` and the span of `b`.
fn principal_overlap(a: &Subspace, b: &Subspace) -> f64 {
    let ba = a.basis();
    let m = CMatrix::from_fn(ba.len(), ba.len(), |i, j| {
        ba[i]
            .amplitudes()
            .dotc(&(b.projector() * ba[j].amplitudes()))
    });
    eigh(&hermitian_part(&m)).pairs[0].value
}

/// Folds into group `x` every group that reaches `group_overlap_min`
/// against its span, feeding their basis vectors in as new members.
fn consolidate(groups: &mut Vec<Group>, mut x: usize, config: &ProtocolConfig) -> Result<()> {
    loop {
        let Some(j) = (0..groups.len()).find(|&j| {
            j != x
                && principal_overlap(&groups[j].span, &groups[x].span) >= config.group_overlap_min
        }) else {
            return Ok(());
        };
        let other = groups.remove(j);
        if j < x {
            x -= 1;
        }
        for b in other.span.basis() {
            groups[x].absorb(b, config)?;
        }
    }
}

fn finished(groups: &[Group]) -> bool {
    let open = groups.iter().filter(|g| !g.complete).count();
    !groups.is_empty() && (open == 0 || (open == 1 && groups.len() >= 2))
}

/// Groups above-floor eigenvectors across trials into invariant subspaces.
///
/// A vector joins the group it overlaps most when the squared projection
/// reaches `group_overlap_min`; afterwards any group with a direction that
/// reaches the same overlap against the grown span is merged in. A group is confirmed once a new member adds a residual below
/// `gs_null_threshold`. Discovery stops when at most one group is
/// unconfirmed, and that one is replaced by the complement of the rest.
pub fn discover_subspaces(
    ch: &KrausChannel,
    settings: &TrialSettings,
    config: &ProtocolConfig,
    seed: u64,
) -> Result<ProtocolResult> {
    let d = ch.dim();
    let mut runner = TrialRunner::new(ch, settings, config, seed)?;
    let max_trials = 2 + config.max_extra_trials;
    let mut groups: Vec<Group> = Vec::new();
    let mut status = ProtocolStatus::Partial;

    while runner.trials.len() < max_trials {
        let trial = runner.run(None)?;
        let vectors: Vec<Ket> = trial
            .eigensystem
            .above(config.eigenvalue_floor)
            .map(|p| p.vector.clone())
            .collect();
        if vectors.len() == d {
            status = ProtocolStatus::NoMultiDimensionalDfs;
            break;
        }
        for v in &vectors {
            let overlaps: Vec<f64> = groups
                .iter()
                .map(|g| g.span.projection_norm_sqr(v.amplitudes()))
                .collect();
            let best = (0..groups.len()).fold(None, |b: Option<usize>, i| match b {
                Some(j) if overlaps[j] >= overlaps[i] => Some(j),
                _ => Some(i),
            });
            match best {
                Some(i) if overlaps[i] >= config.group_overlap_min => {
                    groups[i].absorb(v, config)?;
                    consolidate(&mut groups, i, config)?;
                }
                _ => groups.push(Group {
                    span: Subspace::new(vec![v.clone()])?,
                    complete: false,
                }),
            }
        }
        if finished(&groups) {
            status = ProtocolStatus::Complete;
            break;
        }
    }

    let (subspaces, confirmed) = match status {
        ProtocolStatus::NoMultiDimensionalDfs => (Vec::new(), Vec::new()),
        _ => assemble(&groups, status == ProtocolStatus::Complete, config)?,
    };
    let mut syndromes = SyndromeFlags::default();
    if status == ProtocolStatus::Partial {
        syndromes.warnings.push(format!(
            "{} of {} groups unconfirmed after {} trials",
            groups.iter().filter(|g| !g.complete).count(),
            groups.len(),
            runner.trials.len()
        ));
    }
    Ok(ProtocolResult {
        status,
        dfs_1d: None,
        dfs_complement: None,
        subspaces,
        confirmed,
        syndromes,
        measurement_settings_used: runner.ledger.count(),
        trial_records: runner.trials,
        chosen_pair: None,
    })
}

/// Sequentially orthogonalised group spans. When `infer_rest` is set the
/// unconfirmed group is replaced by the complement of the confirmed ones.
fn assemble(
    groups: &[Group],
    infer_rest: bool,
    config: &ProtocolConfig,
) -> Result<(Vec<Subspace>, Vec<bool>)> {
    let Some(first) = groups.first() else {
        return Ok((Vec::new(), Vec::new()));
    };
    let d = first.span.ambient_dim();
    let mut taken: Option<Subspace> = None;
    let mut out = Vec::new();
    let mut confirmed = Vec::new();
    let ordered = groups
        .iter()
        .filter(|g| g.complete)
        .chain(groups.iter().filter(|g| !g.complete && !infer_rest));
    for g in ordered {
        let mut own: Vec<Ket> = Vec::new();
        for b in g.span.basis() {
            let mut all = taken.clone();
            let grew = match all.as_mut() {
                Some(s) => s.extend(b.amplitudes(), config.gs_null_threshold)?.1,
                None => {
                    all = Some(Subspace::new(vec![b.clone()])?);
                    true
                }
            };
            if grew {
                let s = all.expect("set above");
                own.push(s.basis().last().expect("non-empty").clone());
                taken = Some(s);
            }
        }
        if !own.is_empty() {
            out.push(Subspace::new(own)?);
            confirmed.push(g.complete);
        }
    }
    if infer_rest {
        let rest = match &taken {
            Some(t) => t.complement()?,
            None => Some(Subspace::full(d)?),
        };
        if let Some(rest) = rest {
            out.push(rest);
            confirmed.push(false);
        }
    }
    Ok((out, confirmed))
}
