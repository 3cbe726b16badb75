//! CSV writers and the deployment import/export format.
//!
//! All numeric cells are written with Rust's shortest-roundtrip float
//! formatting, so identical inputs produce byte-identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use uavnet_core::formation::FormationSample;
use uavnet_core::geometry::{Deployment, HeightLaw};
use uavnet_core::montecarlo::MetricEstimate;
use uavnet_core::tracking::{ImpulseEvent, TrackingSample};

use crate::CliError;

pub fn write_lines(path: &Path, lines: &[String]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    for line in lines {
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// `id,x_m,y_m,h_m` with a mandatory header row.
pub fn write_deployment(path: &Path, dep: &Deployment) -> Result<(), CliError> {
    let mut lines = vec!["id,x_m,y_m,h_m".to_string()];
    for i in 0..dep.len() {
        let (x, y) = dep.planar[i];
        lines.push(format!("{i},{x},{y},{}", dep.heights[i]));
    }
    write_lines(path, &lines)
}

/// Reads a deployment CSV back; the header row is required and validated.
pub fn read_deployment(
    path: &Path,
    region_radius: f64,
    density: f64,
) -> Result<Deployment, CliError> {
    let reader = BufReader::new(File::open(path)?);
    let mut planar = Vec::new();
    let mut heights = Vec::new();
    let mut lines = reader.lines();
    let header =
        lines.next().ok_or_else(|| CliError::Validation("deployment csv: empty file".into()))??;
    if header.trim() != "id,x_m,y_m,h_m" {
        return Err(CliError::Validation(format!(
            "deployment csv: expected header \"id,x_m,y_m,h_m\", got \"{header}\""
        )));
    }
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CliError::Validation(format!(
                "deployment csv line {}: expected 4 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let parse = |s: &str, what: &str| -> Result<f64, CliError> {
            s.trim().parse::<f64>().map_err(|_| {
                CliError::Validation(format!(
                    "deployment csv line {}: bad {what} \"{s}\"",
                    lineno + 2
                ))
            })
        };
        planar.push((parse(fields[1], "x_m")?, parse(fields[2], "y_m")?));
        heights.push(parse(fields[3], "h_m")?);
    }
    let (min_h, max_h) = heights
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &h| (lo.min(h), hi.max(h)));
    Ok(Deployment {
        planar,
        heights,
        region_radius,
        density,
        height_law: if min_h == max_h && min_h.is_finite() {
            HeightLaw::Fixed(min_h)
        } else {
            HeightLaw::Uniform { min: min_h.min(50.0), max: max_h.max(min_h) }
        },
        seed: 0,
    })
}

/// Coverage results: `scheme,alpha,lambda_per_km2,m,gamma_db,gamma_linear,
/// coverage,std_err,trials` (thresholds carried in both dB and linear).
pub struct CoverageRow {
    pub scheme: String,
    pub alpha: f64,
    pub lambda_per_km2: f64,
    pub m: f64,
    pub gamma_db: f64,
    pub gamma_linear: f64,
    pub est: MetricEstimate,
}

pub fn coverage_csv(rows: &[CoverageRow]) -> Vec<String> {
    let mut lines =
        vec!["scheme,alpha,lambda_per_km2,m,gamma_db,gamma_linear,coverage,std_err,trials"
            .to_string()];
    for r in rows {
        lines.push(format!(
            "{},{},{},{},{},{},{},{},{}",
            r.scheme,
            r.alpha,
            r.lambda_per_km2,
            r.m,
            r.gamma_db,
            r.gamma_linear,
            r.est.value,
            r.est.std_err,
            r.est.trials_used
        ));
    }
    lines
}

/// Rate results: `scheme,alpha,lambda_per_km2,m,rate_nats,std_err,trials`.
pub struct RateRow {
    pub scheme: String,
    pub alpha: f64,
    pub lambda_per_km2: f64,
    pub m: f64,
    pub est: MetricEstimate,
}

pub fn rate_csv(rows: &[RateRow]) -> Vec<String> {
    let mut lines = vec!["scheme,alpha,lambda_per_km2,m,rate_nats,std_err,trials".to_string()];
    for r in rows {
        lines.push(format!(
            "{},{},{},{},{},{},{}",
            r.scheme, r.alpha, r.lambda_per_km2, r.m, r.est.value, r.est.std_err, r.est.trials_used
        ));
    }
    lines
}

/// Trajectory rows: `t,agent_id,role,x,y,z,vx,vy,vz,err_pos,err_vel`.
/// Agent 0 is the leader (error columns empty for it in formation runs,
/// where errors are relative to the leader itself).
pub fn formation_csv(samples: &[FormationSample]) -> Vec<String> {
    let mut lines = vec!["t,agent_id,role,x,y,z,vx,vy,vz,err_pos,err_vel".to_string()];
    for s in samples {
        let st = &s.state;
        lines.push(format!(
            "{},0,leader,{},{},{},{},{},{},,",
            st.t,
            st.leader_pos.x,
            st.leader_pos.y,
            st.leader_pos.z,
            st.leader_vel.x,
            st.leader_vel.y,
            st.leader_vel.z
        ));
        for k in 0..st.follower_pos.len() {
            let p = st.follower_pos[k];
            let v = st.follower_vel[k];
            lines.push(format!(
                "{},{},follower,{},{},{},{},{},{},{},{}",
                st.t,
                k + 1,
                p.x,
                p.y,
                p.z,
                v.x,
                v.y,
                v.z,
                s.pos_err[k],
                s.vel_err[k]
            ));
        }
    }
    lines
}

/// Tracking trajectory rows carry an extra `impulse` flag column.
pub fn tracking_csv(samples: &[TrackingSample]) -> Vec<String> {
    let mut lines = vec!["t,agent_id,role,x,y,z,vx,vy,vz,err_pos,err_vel,impulse".to_string()];
    for s in samples {
        let st = &s.state;
        let flag = if s.impulse { 1 } else { 0 };
        lines.push(format!(
            "{},0,leader,{},{},{},{},{},{},{},{},{flag}",
            st.t,
            st.leader_pos.x,
            st.leader_pos.y,
            st.leader_pos.z,
            st.leader_vel.x,
            st.leader_vel.y,
            st.leader_vel.z,
            s.pos_err[0],
            s.vel_err[0]
        ));
        for k in 0..st.follower_pos.len() {
            let p = st.follower_pos[k];
            let v = st.follower_vel[k];
            lines.push(format!(
                "{},{},follower,{},{},{},{},{},{},{},{},{flag}",
                st.t,
                k + 1,
                p.x,
                p.y,
                p.z,
                v.x,
                v.y,
                v.z,
                s.pos_err[k + 1],
                s.vel_err[k + 1]
            ));
        }
    }
    lines
}

/// Impulse log: `t_k,agent_id,ell,dx,dy,dz,dvx,dvy,dvz`.
pub fn impulse_csv(events: &[ImpulseEvent]) -> Vec<String> {
    let mut lines = vec!["t_k,agent_id,ell,dx,dy,dz,dvx,dvy,dvz".to_string()];
    for ev in events {
        for (agent, ell) in ev.ells.iter().enumerate() {
            let dx = ev.dx[agent];
            let dv = ev.dv[agent];
            lines.push(format!(
                "{},{},{},{},{},{},{},{},{}",
                ev.t, agent, ell, dx.x, dx.y, dx.z, dv.x, dv.y, dv.z
            ));
        }
    }
    lines
}
