#include "tkmeans/synthetic.hpp"

#include <random>

#include "tkmeans/errors.hpp"
#include "tkmeans/random.hpp"

namespace tkm {

ReducedDataset make_blobs(const BlobSpec& spec) {
  if (spec.clusters < 1 || spec.dim < 1 || spec.samples < spec.clusters) {
    throw Error(ErrorCode::InvalidArgument, "blob spec needs 1 <= clusters <= samples, dim >= 1");
  }
  if (!(spec.std_dev > 0.0) || !(spec.separation > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "std_dev and separation must be positive");
  }
  Rng rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Center spread grows with the required separation; redraw until it holds.
  const double min_dist = spec.separation * spec.std_dev;
  Matrix centers(spec.dim, spec.clusters);
  for (int attempt = 0;; ++attempt) {
    if (attempt == 10000) {
      throw Error(ErrorCode::NumericalBreakdown, "could not place separated blob centers");
    }
    const double spread = min_dist * (1.0 + 0.1 * attempt);
    for (Eigen::Index c = 0; c < centers.cols(); ++c) {
      for (Eigen::Index r = 0; r < centers.rows(); ++r) centers(r, c) = spread * gauss(rng);
    }
    bool ok = true;
    for (int a = 0; a < spec.clusters && ok; ++a) {
      for (int b = a + 1; b < spec.clusters && ok; ++b) {
        ok = (centers.col(a) - centers.col(b)).norm() >= min_dist;
      }
    }
    if (ok) break;
  }

  ReducedDataset out;
  out.X.resize(spec.dim, spec.samples);
  out.labels.resize(static_cast<std::size_t>(spec.samples));
  for (int j = 0; j < spec.samples; ++j) {
    const int label = j % spec.clusters;
    out.labels[static_cast<std::size_t>(j)] = label;
    for (int r = 0; r < spec.dim; ++r) {
      out.X(r, j) = centers(r, label) + spec.std_dev * gauss(rng);
    }
  }
  out.class_count = spec.clusters;
  out.reduction_meta = {"none", spec.dim, spec.seed};
  return out;
}

LabeledCorpus make_blob_corpus(const BlobSpec& spec) {
  const ReducedDataset blobs = make_blobs(spec);
  const Vector shift = (1.0 - blobs.X.rowwise().minCoeff().array()).matrix();
  const Matrix positive = blobs.X.colwise() + shift;
  LabeledCorpus corpus;
  corpus.features = Matrix(positive.transpose()).sparseView();
  corpus.features.makeCompressed();
  corpus.labels = blobs.labels;
  corpus.class_count = blobs.class_count;
  return corpus;
}

}  // namespace tkm
