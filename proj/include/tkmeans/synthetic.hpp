#pragma once

#include <cstdint>

#include "tkmeans/data_pipeline.hpp"

namespace tkm {

struct BlobSpec {
  int clusters = 3;
  int dim = 10;
  int samples = 300;
  double std_dev = 1.0;
  /// Minimum distance between any two centers, in units of std_dev.
  double separation = 20.0;
  std::uint64_t seed = 0;
};

/// Isotropic Gaussian blobs with known labels. Samples are dealt round-robin
/// to clusters, so sizes differ by at most one. Columns of X are samples.
ReducedDataset make_blobs(const BlobSpec& spec);

/// The same blobs as a corpus with every coordinate shifted to be strictly
/// positive, suitable for the Matrix Market writer. Shifting all samples by
/// a common vector leaves cluster structure unchanged.
LabeledCorpus make_blob_corpus(const BlobSpec& spec);

}  // namespace tkm
