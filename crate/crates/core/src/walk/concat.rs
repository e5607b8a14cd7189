use super::{Jump, Trajectory, WalkError};

/// Glues trajectories end to end on `Z^d`: each one is translated so that it
/// starts where the previous one ended and shifted in time by the total
/// duration so far.
///
/// The result starts at the first trajectory's start and origin. Only the
/// first trajectory's regeneration marks are kept, since later marks no
/// longer sit at the start after translation.
pub fn concatenate(trajs: &[Trajectory]) -> Result<Trajectory, WalkError> {
    let first = trajs.first().ok_or(WalkError::EmptyConcatenation)?;
    let beta = first.beta();
    let dim = first.start().dim();
    for t in trajs {
        if t.beta() != beta {
            return Err(WalkError::MismatchedBeta(beta, t.beta()));
        }
        if t.start().dim() != dim {
            return Err(WalkError::InvalidTrajectory("dimension mismatch".into()));
        }
    }

    let mut jumps: Vec<Jump> = first.jumps().to_vec();
    let mut end_time = first.horizon();
    for t in &trajs[1..] {
        let end_pos = jumps.last().map_or(first.start(), |j| &j.site).clone();
        let delta = end_pos.delta(t.start());
        for j in t.jumps() {
            let local = j.time.sub(t.origin(), beta).expect("jump after origin");
            let time = end_time.add(local, beta);
            // equal times can appear only through rounding of the shift
            if jumps.last().is_some_and(|p| p.time >= time) {
                return Err(WalkError::InvalidTrajectory("time shift lost precision".into()));
            }
            jumps.push(Jump {
                time,
                site: j.site.offset_by(&delta),
            });
        }
        let duration = t.horizon().sub(t.origin(), beta).expect("horizon after origin");
        end_time = end_time.add(duration, beta);
    }
    Ok(Trajectory::from_parts_unchecked(
        beta,
        first.start().clone(),
        first.origin(),
        jumps,
        end_time,
        first.regen_marks().to_vec(),
    ))
}
