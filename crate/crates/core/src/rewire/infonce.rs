//! In-batch InfoNCE over query/answer pairs.
//!
//! For anchor query `q_i` the candidate set is every answer `a_1..a_N` plus
//! every other query `q_j (j ≠ i)`: 2N−1 vectors, with the positive `a_i`
//! among them. The loss is the sum over anchors of
//! `−log softmax_{candidates}(cos(q_i, ·)/τ)[a_i]`.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::encoders::Matrix;
use crate::error::{ProbeError, Result};

#[derive(Debug, Clone)]
pub struct InfoNceOutput {
    pub loss: f64,
    /// dL/d(query rows), same shape as the queries.
    pub query_grads: Matrix,
    /// dL/d(answer rows).
    pub answer_grads: Matrix,
}

fn unit_rows(m: &Matrix, what: &str) -> Result<(Matrix, Array1<f64>)> {
    let norms: Array1<f64> = m.map_axis(Axis(1), |r| r.dot(&r).sqrt());
    if let Some(i) = norms.iter().position(|n| *n <= 0.0 || !n.is_finite()) {
        return Err(ProbeError::NumericalDomain(format!(
            "{what} row {i} has zero or non-finite norm"
        )));
    }
    let unit = m / &norms.view().insert_axis(Axis(1));
    Ok((unit, norms))
}

/// Projects a gradient w.r.t. a unit vector back to the raw vector.
fn through_normalization(g: ArrayView1<f64>, unit: ArrayView1<f64>, norm: f64) -> Array1<f64> {
    let radial = g.dot(&unit);
    (&g - &(&unit * radial)) / norm
}

pub fn infonce_loss(queries: &Matrix, answers: &Matrix, temperature: f64) -> Result<f64> {
    Ok(infonce_with_grad(queries, answers, temperature)?.loss)
}

pub fn infonce_with_grad(queries: &Matrix, answers: &Matrix, temperature: f64) -> Result<InfoNceOutput> {
    if queries.dim() != answers.dim() {
        return Err(ProbeError::Precondition(format!(
            "query batch {:?} and answer batch {:?} differ in shape",
            queries.dim(),
            answers.dim()
        )));
    }
    if queries.nrows() == 0 {
        return Err(ProbeError::Precondition("empty batch".into()));
    }
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(ProbeError::Precondition(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let n = queries.nrows();
    let (qu, qn) = unit_rows(queries, "query")?;
    let (au, an) = unit_rows(answers, "answer")?;
    let qa = qu.dot(&au.t()) / temperature;
    let qq = qu.dot(&qu.t()) / temperature;

    // Weights of each candidate's logit in dL/dlogit: softmax − one-hot.
    let mut w_qa = Array2::<f64>::zeros((n, n));
    let mut w_qq = Array2::<f64>::zeros((n, n));
    let mut loss = 0.0;
    for i in 0..n {
        let max = (0..n)
            .map(|j| qa[[i, j]])
            .chain((0..n).filter(|&j| j != i).map(|j| qq[[i, j]]))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for j in 0..n {
            z += (qa[[i, j]] - max).exp();
            if j != i {
                z += (qq[[i, j]] - max).exp();
            }
        }
        let lse = max + z.ln();
        loss += lse - qa[[i, i]];
        for j in 0..n {
            w_qa[[i, j]] = (qa[[i, j]] - lse).exp();
            if j != i {
                w_qq[[i, j]] = (qq[[i, j]] - lse).exp();
            }
        }
        w_qa[[i, i]] -= 1.0;
    }

    // logit(i, a_j) = qu_i·au_j/τ and logit(i, q_j) = qu_i·qu_j/τ; q_j appears
    // both as an anchor and as a candidate.
    let g_qu = (w_qa.dot(&au) + w_qq.dot(&qu) + w_qq.t().dot(&qu)) / temperature;
    let g_au = w_qa.t().dot(&qu) / temperature;

    let mut query_grads = Array2::<f64>::zeros(queries.dim());
    let mut answer_grads = Array2::<f64>::zeros(answers.dim());
    for i in 0..n {
        query_grads
            .row_mut(i)
            .assign(&through_normalization(g_qu.row(i), qu.row(i), qn[i]));
        answer_grads
            .row_mut(i)
            .assign(&through_normalization(g_au.row(i), au.row(i), an[i]));
    }
    Ok(InfoNceOutput {
        loss,
        query_grads,
        answer_grads,
    })
}
