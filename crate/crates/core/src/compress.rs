use crate::baselines::{compress_global_topk, compress_segmentwise_topk, compress_uniavg, BaselineOutput};
use crate::error::CompressError;
use crate::merge::compress_merge;
use crate::provenance::{MergeTrace, Provenance};
use crate::sequence::{validate_sequence, CompressionConfig, Matrix, Method, TokenSequence};

#[derive(Debug, Clone, PartialEq)]
pub struct Compressed {
    pub sequence: TokenSequence,
    pub provenance: Provenance,
    /// Empty for the non-merging methods and at keep ratio 1.
    pub trace: MergeTrace,
}

/// Compresses `seq` with the configured method.
///
/// A keep ratio of 1 returns the input unchanged for every method.
pub fn compress(seq: &TokenSequence, config: &CompressionConfig) -> Result<Compressed, CompressError> {
    config.validate()?;
    let window = config.effective_window();
    let provenance = |groups: Vec<Vec<usize>>, dropped: Vec<usize>| Provenance {
        method: config.method,
        keep_ratio: config.keep_ratio,
        window,
        weighting: config.weighting,
        original_length: seq.len(),
        groups,
        dropped,
    };

    if config.keep_ratio.is_full() {
        return Ok(Compressed {
            sequence: seq.clone(),
            provenance: provenance((1..=seq.len()).map(|p| vec![p]).collect(), Vec::new()),
            trace: MergeTrace::default(),
        });
    }

    let baseline = |out: BaselineOutput| Compressed {
        sequence: out.sequence,
        provenance: provenance(out.groups, out.dropped),
        trace: MergeTrace::default(),
    };

    Ok(match config.method {
        Method::Ltbm | Method::GlobalMerge => {
            let window = window.expect("merge methods have a window");
            let out = compress_merge(seq, config.keep_ratio, window, config.weighting)?;
            Compressed {
                sequence: out.sequence,
                provenance: provenance(out.groups, Vec::new()),
                trace: out.trace,
            }
        }
        Method::UniAvg => baseline(compress_uniavg(seq, config.keep_ratio)?),
        Method::GlobalTopK => baseline(compress_global_topk(seq, config.keep_ratio)),
        Method::SegmentwiseTopK => baseline(compress_segmentwise_topk(seq, config.keep_ratio, config.segments)?),
    })
}

/// Plain-data result for callers that hold raw buffers, such as
/// host-language wrappers.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixResult {
    pub matrix: Matrix,
    /// 1-based input positions behind each output row.
    pub groups: Vec<Vec<usize>>,
    pub passes: usize,
}

/// Validates a raw row-major matrix and compresses it. Produces the same
/// rows and groups as [`compress`] on the same values.
pub fn compress_matrix(raw: Matrix, config: &CompressionConfig) -> Result<MatrixResult, CompressError> {
    if raw.data.len() != raw.rows * raw.cols {
        return Err(CompressError::DimensionMismatch {
            expected: raw.rows * raw.cols,
            found: raw.data.len(),
        });
    }
    let out = compress(&validate_sequence(raw)?, config)?;
    Ok(MatrixResult {
        matrix: out.sequence.into_matrix(),
        groups: out.provenance.groups,
        passes: out.trace.passes.len(),
    })
}
