use std::io::{self, BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use super::WignerGaussian;
use crate::error::{invalid, Error, Result};
use crate::state::GaussianState;

/// First eight bytes of a binary grid snapshot.
pub const GRID_MAGIC: [u8; 8] = *b"DTWGRID1";
const HEADER_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBounds {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl GridBounds {
    pub fn validate(&self) -> Result<()> {
        let ok = |a: f64, b: f64| a.is_finite() && b.is_finite() && b > a;
        if !ok(self.q_min, self.q_max) || !ok(self.p_min, self.p_max) {
            return Err(invalid("bounds", format!("degenerate domain {self:?}")));
        }
        Ok(())
    }
}

/// Cell-centred field on a rectangular `(q, p)` domain.
///
/// `values` is row-major with the position index outermost:
/// cell `(i, j)` sits at `q_min + (i + ½)dq`, `p_min + (j + ½)dp` and is
/// stored at `i * n_p + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_q: usize,
    pub n_p: usize,
    pub values: Vec<f64>,
    pub time: f64,
    /// Time step used by the last evolution (0 for a fresh grid).
    pub dt: f64,
    /// Mass that left through the boundary, integrated over time.
    pub leaked: f64,
}

impl PhaseSpaceGrid {
    pub fn zeros(bounds: GridBounds, n_q: usize, n_p: usize) -> Result<Self> {
        bounds.validate()?;
        if n_q < 3 || n_p < 3 {
            return Err(invalid("n_q/n_p", format!("need at least 3 cells per axis, got {n_q}×{n_p}")));
        }
        Ok(Self {
            q_min: bounds.q_min,
            q_max: bounds.q_max,
            p_min: bounds.p_min,
            p_max: bounds.p_max,
            n_q,
            n_p,
            values: vec![0.0; n_q * n_p],
            time: 0.0,
            dt: 0.0,
            leaked: 0.0,
        })
    }

    /// Samples `f(q, p)` at the cell centres.
    pub fn from_fn(
        bounds: GridBounds,
        n_q: usize,
        n_p: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut g = Self::zeros(bounds, n_q, n_p)?;
        for i in 0..n_q {
            let q = g.q_at(i);
            for j in 0..n_p {
                g.values[i * n_p + j] = f(q, g.p_at(j));
            }
        }
        Ok(g)
    }

    /// Samples the Wigner function of `state`.
    pub fn from_state(state: &GaussianState, bounds: GridBounds, n_q: usize, n_p: usize) -> Result<Self> {
        let w = WignerGaussian::new(*state)?;
        let mut g = Self::from_fn(bounds, n_q, n_p, |q, p| w.eval(q, p))?;
        g.time = state.t;
        Ok(g)
    }

    pub fn bounds(&self) -> GridBounds {
        GridBounds {
            q_min: self.q_min,
            q_max: self.q_max,
            p_min: self.p_min,
            p_max: self.p_max,
        }
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / self.n_q as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / self.n_p as f64
    }

    pub fn q_at(&self, i: usize) -> f64 {
        self.q_min + (i as f64 + 0.5) * self.dq()
    }

    pub fn p_at(&self, j: usize) -> f64 {
        self.p_min + (j as f64 + 0.5) * self.dp()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_p + j]
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dq() * self.dp()
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// `q,p,value` triples with a header row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "q,p,value")?;
        for i in 0..self.n_q {
            let q = self.q_at(i);
            for j in 0..self.n_p {
                writeln!(out, "{:.16e},{:.16e},{:.16e}", q, self.p_at(j), self.get(i, j))?;
            }
        }
        Ok(())
    }

    /// Reads a CSV written by [`write_csv`](Self::write_csv). Bounds are
    /// reconstructed from the cell centres; `time` is not stored in CSV.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (k, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::GridFormat(e.to_string()))?;
            if k == 0 {
                if line.trim() != "q,p,value" {
                    return Err(Error::GridFormat(format!("unexpected header `{line}`")));
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let f: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::GridFormat(format!("line {}: {e}", k + 1)))?;
            if f.len() != 3 {
                return Err(Error::GridFormat(format!("line {}: expected 3 fields", k + 1)));
            }
            rows.push([f[0], f[1], f[2]]);
        }
        let n_p = rows.iter().take_while(|r| r[0] == rows[0][0]).count();
        if n_p < 3 || rows.len() % n_p != 0 {
            return Err(Error::GridFormat("rows do not form a rectangular grid".into()));
        }
        let n_q = rows.len() / n_p;
        let dq = (rows[(n_q - 1) * n_p][0] - rows[0][0]) / (n_q - 1) as f64;
        let dp = (rows[n_p - 1][1] - rows[0][1]) / (n_p - 1) as f64;
        let bounds = GridBounds {
            q_min: rows[0][0] - 0.5 * dq,
            q_max: rows[0][0] + (n_q as f64 - 0.5) * dq,
            p_min: rows[0][1] - 0.5 * dp,
            p_max: rows[0][1] + (n_p as f64 - 0.5) * dp,
        };
        let mut g = Self::zeros(bounds, n_q, n_p)?;
        for (dst, row) in g.values.iter_mut().zip(&rows) {
            *dst = row[2];
        }
        Ok(g)
    }

    /// Binary snapshot: a 64-byte little-endian header
    /// (`magic[8] n_q:u64 n_p:u64 q_min q_max p_min p_max time`, floats as
    /// f64) followed by `n_q·n_p` f64 values in storage order.
    pub fn write_binary<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut header = [0u8; HEADER_LEN];
        header[0..8].copy_from_slice(&GRID_MAGIC);
        header[8..16].copy_from_slice(&(self.n_q as u64).to_le_bytes());
        header[16..24].copy_from_slice(&(self.n_p as u64).to_le_bytes());
        for (k, x) in [self.q_min, self.q_max, self.p_min, self.p_max, self.time]
            .iter()
            .enumerate()
        {
            header[24 + 8 * k..32 + 8 * k].copy_from_slice(&x.to_le_bytes());
        }
        out.write_all(&header)?;
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        input
            .read_exact(&mut header)
            .map_err(|e| Error::GridFormat(format!("header: {e}")))?;
        if header[0..8] != GRID_MAGIC {
            return Err(Error::GridFormat("bad magic".into()));
        }
        let u = |k: usize| u64::from_le_bytes(header[k..k + 8].try_into().unwrap()) as usize;
        let f = |k: usize| f64::from_le_bytes(header[k..k + 8].try_into().unwrap());
        let (n_q, n_p) = (u(8), u(16));
        let bounds = GridBounds {
            q_min: f(24),
            q_max: f(32),
            p_min: f(40),
            p_max: f(48),
        };
        let mut g = Self::zeros(bounds, n_q, n_p)?;
        g.time = f(56);
        let mut body = vec![0u8; n_q * n_p * 8];
        input
            .read_exact(&mut body)
            .map_err(|e| Error::GridFormat(format!("body: {e}")))?;
        for (dst, chunk) in g.values.iter_mut().zip(body.chunks_exact(8)) {
            *dst = f64::from_le_bytes(chunk.try_into().unwrap());
        }
        Ok(g)
    }
}

/// Mass-normalized first and second moments by midpoint quadrature.
pub fn grid_moments(grid: &PhaseSpaceGrid) -> Result<GaussianState> {
    let mass = grid.mass();
    if !((mass - 1.0).abs() <= 0.01) {
        return Err(Error::MassLoss(1.0 - mass));
    }
    let (n_q, n_p) = (grid.n_q, grid.n_p);
    let sum: f64 = grid.values.iter().sum();
    let mut mq = 0.0;
    let mut mp = 0.0;
    for i in 0..n_q {
        let q = grid.q_at(i);
        let row = &grid.values[i * n_p..(i + 1) * n_p];
        let mut row_sum = 0.0;
        for (j, &w) in row.iter().enumerate() {
            row_sum += w;
            mp += w * grid.p_at(j);
        }
        mq += row_sum * q;
    }
    mq /= sum;
    mp /= sum;
    let (mut cqq, mut cpp, mut cpq) = (0.0, 0.0, 0.0);
    for i in 0..n_q {
        let dq = grid.q_at(i) - mq;
        let row = &grid.values[i * n_p..(i + 1) * n_p];
        for (j, &w) in row.iter().enumerate() {
            let dp = grid.p_at(j) - mp;
            cqq += w * dq * dq;
            cpp += w * dp * dp;
            cpq += w * dq * dp;
        }
    }
    Ok(GaussianState {
        t: grid.time,
        sigma_q: mq,
        sigma_p: mp,
        sigma_qq: cqq / sum,
        sigma_pp: cpp / sum,
        sigma_pq: cpq / sum,
    })
}
