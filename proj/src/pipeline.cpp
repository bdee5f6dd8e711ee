#include "hv2/pipeline.hpp"

#include <cmath>

#include "hv2/common.hpp"
#include "hv2/corpus.hpp"
#include "hv2/parallel.hpp"

namespace hv2 {

namespace {

void validate_chain(const ModelPipeline& p) {
  if (p.pca.d() != p.v1_dim())
    throw data_error("pipeline: pca input dim " + std::to_string(p.pca.d()) +
                     " != v1 dim " + std::to_string(p.v1_dim()));
  const Eigen::Index v2_in = p.kind == V2Kind::sc ? p.dict.k() : p.filters.k();
  if (v2_in != p.pca.k())
    throw data_error("pipeline: v2 input dim " + std::to_string(v2_in) +
                     " != pca k " + std::to_string(p.pca.k()));
}

void factor_frame(ModelPipeline& p) {
  const Eigen::MatrixXd gram = frame_gram(p.bank);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.info() != Eigen::Success)
    throw numeric_error("gabor frame eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double floor = kFrameCutoff * ev(ev.size() - 1);
  p.frame_basis = es.eigenvectors();
  p.frame_inv_eig.resize(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    p.frame_inv_eig(i) = ev(i) >= floor ? 1.0 / ev(i) : 0.0;
}

}  // namespace

ModelPipeline assemble_pipeline(GaborBank bank, PcaModel pca, Dictionary dict,
                                double lambda, InferConfig infer) {
  ModelPipeline p;
  p.bank = std::move(bank);
  p.pca = std::move(pca);
  p.kind = V2Kind::sc;
  p.dict = std::move(dict);
  p.lambda = lambda;
  p.infer = infer;
  factor_frame(p);
  validate_chain(p);
  return p;
}

ModelPipeline assemble_pipeline(GaborBank bank, PcaModel pca, IcaFilters filters) {
  ModelPipeline p;
  p.bank = std::move(bank);
  p.pca = std::move(pca);
  p.kind = V2Kind::ica;
  p.filters = std::move(filters);
  factor_frame(p);
  validate_chain(p);
  return p;
}

Eigen::VectorXd complex_to_vector(const V1Complex& c) {
  return Eigen::Map<const Eigen::VectorXd>(c.v.data(),
                                           static_cast<Eigen::Index>(c.v.size()));
}

V1Complex vector_to_complex(const Eigen::VectorXd& v, int grid) {
  const std::size_t want = static_cast<std::size_t>(grid) * grid * 36;
  if (static_cast<std::size_t>(v.size()) != want)
    throw data_error("vector_to_complex: size mismatch");
  V1Complex c;
  c.grid = grid;
  c.v.assign(v.data(), v.data() + v.size());
  return c;
}

namespace {

Eigen::VectorXd v2_respond(const ModelPipeline& p, const Eigen::VectorXd& y,
                           double lambda_override) {
  if (p.kind == V2Kind::sc) {
    const double lam = lambda_override >= 0.0 ? lambda_override : p.lambda;
    return infer(p.dict, y, lam, p.infer);
  }
  return ica_respond(p.filters, y);
}

// Image from a full (possibly signed) complex vector and saved phases:
// adjoint, then the frame solve for the least-squares image.
std::vector<double> complex_vec_to_image(const ModelPipeline& p,
                                         const Eigen::VectorXd& cvec,
                                         const PhaseRecord& phases) {
  const V1Complex c = vector_to_complex(cvec, p.bank.grid);
  const V1Simple s = v1_complex_inverse(c, phases);
  const std::vector<double> adj = v1_simple_inverse(s, p.bank);
  const Eigen::Map<const Eigen::VectorXd> av(adj.data(),
                                             static_cast<Eigen::Index>(adj.size()));
  const Eigen::VectorXd img =
      p.frame_basis * (p.frame_inv_eig.asDiagonal() * (p.frame_basis.transpose() * av));
  return std::vector<double>(img.data(), img.data() + img.size());
}

}  // namespace

ForwardResult forward(const ModelPipeline& p, const std::vector<double>& patch,
                      double lambda_override) {
  ForwardResult out;
  const V1Simple s = v1_simple(patch, p.bank);
  auto [c, ph] = v1_complex(s);
  out.complex = std::move(c);
  out.phases = std::move(ph);
  const Eigen::VectorXd y = whiten(p.pca, complex_to_vector(out.complex));
  out.v2 = v2_respond(p, y, lambda_override);
  return out;
}

Eigen::MatrixXd complex_batch(const GaborBank& bank, const std::vector<Patch>& patches) {
  const Eigen::Index d = static_cast<Eigen::Index>(bank.grid) * bank.grid * 36;
  Eigen::MatrixXd out(d, static_cast<Eigen::Index>(patches.size()));
  parallel_for(patches.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto [c, ph] = v1_complex(v1_simple(patches[i].data, bank));
      out.col(static_cast<Eigen::Index>(i)) = complex_to_vector(c);
    }
  });
  return out;
}

Eigen::MatrixXd encode_batch(const ModelPipeline& p, const std::vector<Patch>& patches,
                             double lambda_override) {
  if (patches.empty()) return Eigen::MatrixXd(p.v2_dim(), 0);
  const Eigen::MatrixXd y = whiten_batch(p.pca, complex_batch(p.bank, patches));
  if (p.kind == V2Kind::ica) return ica_respond_batch(p.filters, y);
  const double lam = lambda_override >= 0.0 ? lambda_override : p.lambda;
  Eigen::MatrixXd codes(p.dict.m(), y.cols());
  const Eigen::Index chunk = 512;
  for (Eigen::Index start = 0; start < y.cols(); start += chunk) {
    const Eigen::Index b = std::min(chunk, y.cols() - start);
    codes.middleCols(start, b) =
        infer_batch(p.dict, y.middleCols(start, b), lam, p.infer).codes;
  }
  return codes;
}

std::vector<double> backward(const ModelPipeline& p, const Eigen::VectorXd& v2,
                             const PhaseRecord& phases) {
  if (v2.size() != p.v2_dim()) throw data_error("backward: response length mismatch");
  const Eigen::VectorXd y =
      p.kind == V2Kind::sc ? reconstruct(p.dict, v2) : ica_backward(p.filters, v2);
  return complex_vec_to_image(p, unwhiten(p.pca, y), phases);
}

V1Complex backproject_code(const ModelPipeline& p, const Eigen::VectorXd& code) {
  if (code.size() != p.v2_dim())
    throw data_error("backproject: response length mismatch");
  const Eigen::VectorXd y =
      p.kind == V2Kind::sc ? reconstruct(p.dict, code) : ica_backward(p.filters, code);
  // Linear part of unwhiten only; the mean offset belongs to data decoding,
  // not to unit structure.
  const Eigen::VectorXd cvec =
      p.pca.components.transpose() *
      (p.pca.eigenvalues.array().sqrt() * y.array()).matrix();
  return vector_to_complex(cvec, p.bank.grid);
}

V1Complex backproject_unit(const ModelPipeline& p, Eigen::Index unit) {
  if (unit < 0 || unit >= p.v2_dim())
    throw data_error("backproject_unit: index out of range");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(p.v2_dim());
  e(unit) = 1.0;
  return backproject_code(p, e);
}

double image_mse(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw data_error("mse: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

CompletionResult complete_patch(const ModelPipeline& p, const std::vector<double>& patch,
                                int row0, int col0, int size,
                                double lambda_override) {
  CompletionResult out;
  out.row0 = row0;
  out.col0 = col0;
  out.size = size;

  const V1Simple s = v1_simple(patch, p.bank);
  auto [intact, phases] = v1_complex(s);
  V1Complex corrupted = intact;
  if (size != 0) delete_region(corrupted, row0, col0, size);

  const Eigen::VectorXd c_orig = complex_to_vector(intact);
  const Eigen::VectorXd c_corr = complex_to_vector(corrupted);
  const Eigen::VectorXd y = whiten(p.pca, c_corr);
  const Eigen::VectorXd a = v2_respond(p, y, lambda_override);
  const Eigen::VectorXd y_hat =
      p.kind == V2Kind::sc ? reconstruct(p.dict, a) : ica_backward(p.filters, a);
  const Eigen::VectorXd c_hat = unwhiten(p.pca, y_hat);

  out.stages["image"] = patch;
  out.stages["v1"] = complex_vec_to_image(p, c_orig, phases);
  out.stages["v1c-mod"] = complex_vec_to_image(p, c_corr, phases);
  out.stages["pca"] = complex_vec_to_image(p, unwhiten(p.pca, whiten(p.pca, c_corr)), phases);
  out.stages["v2"] = complex_vec_to_image(p, c_hat, phases);

  out.mse = image_mse(out.stages["v2"], patch);
  out.v1c_dist_original = (c_hat - c_orig).squaredNorm() / static_cast<double>(c_orig.size());
  out.v1c_dist_corrupted = (c_hat - c_corr).squaredNorm() / static_cast<double>(c_orig.size());
  return out;
}

TrainedModel train_model(const std::vector<ImageGray>& images, const TrainSpec& spec) {
  GaborConfig gcfg;
  gcfg.stride = spec.stride;
  GaborBank bank = build_gabor_bank(gcfg);
  const Eigen::Index k = spec.pca_k > 0 ? spec.pca_k : (bank.grid == 6 ? 100 : 350);
  const Eigen::Index m = spec.m > 0 ? spec.m : (bank.grid == 6 ? 800 : 2800);

  const std::vector<Patch> patches = sample_patches(images, spec.n_patches, spec.seed);
  const Eigen::MatrixXd cvecs = complex_batch(bank, patches);
  PcaModel pca = fit_pca(cvecs, k);
  const Eigen::MatrixXd white = whiten_batch(pca, cvecs);

  TrainedModel out;
  out.n_patches = patches.size();
  if (spec.kind == V2Kind::sc) {
    ScTrainConfig cfg;
    cfg.lambda = spec.lambda;
    cfg.m = m;
    cfg.epochs = spec.epochs;
    cfg.batch = spec.batch;
    cfg.dict_step = spec.dict_step;
    cfg.step_decay = spec.step_decay;
    cfg.infer = spec.train_infer;
    cfg.seed = spec.seed;
    ScTrainResult r = learn_dictionary(white, cfg);
    out.epoch_objectives = std::move(r.epoch_objectives);
    out.pipeline = assemble_pipeline(std::move(bank), std::move(pca),
                                     std::move(r.dict), spec.lambda, spec.infer);
  } else {
    IcaTrainConfig cfg;
    cfg.m = m;
    cfg.epochs = spec.epochs;
    cfg.batch = spec.batch;
    cfg.step = spec.ica_step;
    cfg.momentum = spec.momentum;
    cfg.step_decay = spec.step_decay;
    cfg.seed = spec.seed;
    IcaTrainResult r = fit_ica(white, cfg);
    out.epoch_objectives = std::move(r.epoch_objectives);
    out.pipeline =
        assemble_pipeline(std::move(bank), std::move(pca), std::move(r.filters));
  }
  return out;
}

}  // namespace hv2
