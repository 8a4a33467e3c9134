#include "kwic/model_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <type_traits>

#include "kwic/error.hpp"

namespace kwic {

namespace {

constexpr std::array<char, 8> kMagic = {'K', 'W', 'I', 'C', 'M', 'D', 'L', '\0'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kKindCnn = 1;
constexpr std::uint32_t kKindLinear = 2;

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts need byte swaps");
static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);

template <typename T>
void put(std::ostream& out, const T& value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ValidationError("model file is truncated: " + path);
  return value;
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  put<std::int64_t>(out, m.rows());
  put<std::int64_t>(out, m.cols());
  // Row-major on disk regardless of Eigen's in-memory layout.
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put<double>(out, m(r, c));
}

Eigen::MatrixXd get_matrix(std::istream& in, const std::string& path) {
  const auto rows = get<std::int64_t>(in, path);
  const auto cols = get<std::int64_t>(in, path);
  if (rows < 0 || cols < 0 || rows > (1 << 24) || cols > (1 << 24))
    throw ValidationError("model file has an implausible tensor shape: " + path);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = get<double>(in, path);
  return m;
}

void put_vector(std::ostream& out, const Eigen::VectorXd& v) {
  put<std::int64_t>(out, v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) put<double>(out, v(i));
}

Eigen::VectorXd get_vector(std::istream& in, const std::string& path) {
  const auto n = get<std::int64_t>(in, path);
  if (n < 0 || n > (1 << 28))
    throw ValidationError("model file has an implausible vector length: " + path);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = get<double>(in, path);
  return v;
}

std::uint32_t read_header(std::istream& in, const std::string& path) {
  const auto magic = get<std::array<char, 8>>(in, path);
  if (magic != kMagic) throw ValidationError("not a model file: " + path);
  const auto version = get<std::uint32_t>(in, path);
  if (version != kFormatVersion)
    throw ValidationError("unsupported model format version " + std::to_string(version) + ": " +
                          path);
  return get<std::uint32_t>(in, path);  // kind tag
}

}  // namespace

void save_cnn_model(const CnnModel<double>& model, const std::string& path) {
  if (!model.all_finite()) throw ValidationError("refusing to save a non-finite model");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open model file for writing: " + path);

  put(out, kMagic);
  put(out, kFormatVersion);
  put(out, kKindCnn);
  put<std::int32_t>(out, model.config.embed_dim);
  put<std::int32_t>(out, model.config.n_filters);
  put<std::int32_t>(out, model.config.kernel_size);
  put<double>(out, model.config.dropout_rate);
  put<std::int32_t>(out, model.config.epochs);
  put<double>(out, model.config.learning_rate);
  put<std::int32_t>(out, model.config.batch_size);
  put<std::uint64_t>(out, model.config.seed);
  put<std::int32_t>(out, model.sequence_length);
  put<std::int32_t>(out, model.vocab_size);
  put<std::uint64_t>(out, model.vocab_fingerprint);

  put_matrix(out, model.embedding);
  put<std::int32_t>(out, static_cast<std::int32_t>(model.conv_taps.size()));
  for (const auto& tap : model.conv_taps) put_matrix(out, tap);
  put_vector(out, model.conv_bias);
  put_vector(out, model.dense_weight);
  put<double>(out, model.dense_bias);
  if (!out) throw ValidationError("failed writing model file: " + path);
}

CnnModel<double> load_cnn_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file: " + path);
  if (read_header(in, path) != kKindCnn)
    throw ValidationError("model file does not hold an occurrence classifier: " + path);

  CnnModel<double> model;
  model.config.embed_dim = get<std::int32_t>(in, path);
  model.config.n_filters = get<std::int32_t>(in, path);
  model.config.kernel_size = get<std::int32_t>(in, path);
  model.config.dropout_rate = get<double>(in, path);
  model.config.epochs = get<std::int32_t>(in, path);
  model.config.learning_rate = get<double>(in, path);
  model.config.batch_size = get<std::int32_t>(in, path);
  model.config.seed = get<std::uint64_t>(in, path);
  model.sequence_length = get<std::int32_t>(in, path);
  model.vocab_size = get<std::int32_t>(in, path);
  model.vocab_fingerprint = get<std::uint64_t>(in, path);

  model.embedding = get_matrix(in, path);
  const auto n_taps = get<std::int32_t>(in, path);
  if (n_taps != model.config.kernel_size)
    throw ValidationError("model file tap count disagrees with its kernel size: " + path);
  for (std::int32_t k = 0; k < n_taps; ++k) model.conv_taps.push_back(get_matrix(in, path));
  model.conv_bias = get_vector(in, path);
  model.dense_weight = get_vector(in, path);
  model.dense_bias = get<double>(in, path);

  if (model.embedding.rows() != model.vocab_size + 2 ||
      model.embedding.cols() != model.config.embed_dim)
    throw ValidationError("model file embedding shape is inconsistent: " + path);
  for (const auto& tap : model.conv_taps)
    if (tap.rows() != model.config.embed_dim || tap.cols() != model.config.n_filters)
      throw ValidationError("model file convolution shape is inconsistent: " + path);
  if (model.conv_bias.size() != model.config.n_filters ||
      model.dense_weight.size() != model.config.n_filters)
    throw ValidationError("model file head shape is inconsistent: " + path);
  if (!model.all_finite()) throw ValidationError("model file holds non-finite values: " + path);
  return model;
}

void save_linear_model(const LinearModel& model, const std::string& path) {
  if (!model.weights.allFinite() || !std::isfinite(model.bias))
    throw ValidationError("refusing to save a non-finite model");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open model file for writing: " + path);

  put(out, kMagic);
  put(out, kFormatVersion);
  put(out, kKindLinear);
  put<std::uint32_t>(out, model.kind == LinearKind::svm ? 1u : 0u);
  put<double>(out, model.config.learning_rate);
  put<std::int32_t>(out, model.config.epochs);
  put<double>(out, model.config.regularization);
  put<std::uint64_t>(out, model.config.seed);
  put<std::uint64_t>(out, model.feature_fingerprint);
  put_vector(out, model.weights);
  put<double>(out, model.bias);
  if (!out) throw ValidationError("failed writing model file: " + path);
}

LinearModel load_linear_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file: " + path);
  if (read_header(in, path) != kKindLinear)
    throw ValidationError("model file does not hold a linear classifier: " + path);

  LinearModel model;
  model.kind = get<std::uint32_t>(in, path) == 1u ? LinearKind::svm : LinearKind::logistic;
  model.config.learning_rate = get<double>(in, path);
  model.config.epochs = get<std::int32_t>(in, path);
  model.config.regularization = get<double>(in, path);
  model.config.seed = get<std::uint64_t>(in, path);
  model.feature_fingerprint = get<std::uint64_t>(in, path);
  model.weights = get_vector(in, path);
  model.bias = get<double>(in, path);
  if (!model.weights.allFinite() || !std::isfinite(model.bias))
    throw ValidationError("model file holds non-finite values: " + path);
  return model;
}

}  // namespace kwic
