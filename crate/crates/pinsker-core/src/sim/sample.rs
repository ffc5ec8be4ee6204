//! Uniform sampling on S^d.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A row-major n × (d+1) matrix of points on S^d.
#[derive(Debug, Clone)]
pub struct Points {
    data: Vec<f64>,
    coords: usize,
}

impl Points {
    pub fn len(&self) -> usize {
        self.data.len() / self.coords
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn coords(&self) -> usize {
        self.coords
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.coords..(i + 1) * self.coords]
    }

    pub fn dot(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Draws n points uniformly on S^d ⊂ R^{d+1} by normalizing independent
/// standard Gaussians (rotation invariance makes the result uniform).
pub fn sample_sphere<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<Points> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let coords = d + 1;
    let mut data = Vec::with_capacity(n * coords);
    for _ in 0..n {
        let start = data.len();
        loop {
            data.truncate(start);
            let mut norm_sq = 0.0;
            for _ in 0..coords {
                let g: f64 = rng.sample(StandardNormal);
                norm_sq += g * g;
                data.push(g);
            }
            // a zero draw has probability zero; regenerate if it happens
            if norm_sq > 0.0 {
                let inv = norm_sq.sqrt().recip();
                for v in &mut data[start..] {
                    *v *= inv;
                }
                break;
            }
        }
    }
    Ok(Points { data, coords })
}

/// One uniformly-random unit vector in R^{d+1}.
pub fn random_direction<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    let points = sample_sphere(1, d, rng).expect("d validated by caller");
    points.row(0).to_vec()
}
