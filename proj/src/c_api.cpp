#include "refnet/refnet.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "refnet/activation.hpp"
#include "refnet/error.hpp"
#include "refnet/io.hpp"
#include "refnet/network.hpp"
#include "refnet/transform.hpp"

struct refnet_activation {
  refnet::Activation value;
};

struct refnet_network {
  refnet::Network value;
};

struct refnet_dataset {
  refnet::Dataset value;
};

namespace {

thread_local std::string g_last_error;

refnet_status ToStatus(refnet::ErrorCode code) {
  using refnet::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return REFNET_ERR_INVALID_ARGUMENT;
    case ErrorCode::kDimensionMismatch: return REFNET_ERR_DIMENSION_MISMATCH;
    case ErrorCode::kParse: return REFNET_ERR_PARSE;
    case ErrorCode::kIo: return REFNET_ERR_IO;
    case ErrorCode::kNotFactorable: return REFNET_ERR_NOT_FACTORABLE;
    case ErrorCode::kNotConvergent: return REFNET_ERR_NOT_CONVERGENT;
    case ErrorCode::kUnsupportedDegree: return REFNET_ERR_UNSUPPORTED_DEGREE;
    case ErrorCode::kDomain: return REFNET_ERR_DOMAIN;
    case ErrorCode::kDegreeTooSmall: return REFNET_ERR_DEGREE_TOO_SMALL;
    case ErrorCode::kNotRefinable: return REFNET_ERR_NOT_REFINABLE;
    case ErrorCode::kNoFollowingLayer: return REFNET_ERR_NO_FOLLOWING_LAYER;
    case ErrorCode::kEmptyDataset: return REFNET_ERR_EMPTY_DATASET;
    case ErrorCode::kPositionOutOfRange: return REFNET_ERR_POSITION_OUT_OF_RANGE;
    case ErrorCode::kEmptyArchitecture: return REFNET_ERR_EMPTY_ARCHITECTURE;
  }
  return REFNET_ERR_INTERNAL;
}

refnet_status SetError(refnet_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into a status and a message.
template <class Body>
refnet_status Guard(Body&& body) {
  try {
    body();
    return REFNET_OK;
  } catch (const refnet::Error& e) {
    return SetError(ToStatus(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return SetError(REFNET_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return SetError(REFNET_ERR_INTERNAL, e.what());
  }
}

void RequireNonNull(const void* p, const char* name) {
  if (p == nullptr)
    refnet::Fail(refnet::ErrorCode::kInvalidArgument, std::string(name) + " is NULL");
}

// Buffer shortfalls have their own status; everything else goes through Guard.
template <class Body>
refnet_status GuardBuffer(std::size_t cap, std::size_t needed, Body&& body) {
  if (cap < needed)
    return SetError(REFNET_ERR_BUFFER_TOO_SMALL,
                    "buffer holds " + std::to_string(cap) + " elements, " +
                        std::to_string(needed) + " needed");
  return Guard(std::forward<Body>(body));
}

refnet_status CopyString(const std::string& s, char* buf, std::size_t cap, std::size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (cap == 0 && buf == nullptr) return REFNET_OK;
  return GuardBuffer(cap, s.size() + 1, [&] {
    RequireNonNull(buf, "buf");
    std::memcpy(buf, s.c_str(), s.size() + 1);
  });
}

std::vector<refnet::Vector> Rows(const double* data, std::size_t count, std::size_t dim) {
  std::vector<refnet::Vector> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k].assign(data + k * dim, data + (k + 1) * dim);
  return out;
}

}  // namespace

extern "C" {

const char* refnet_status_name(refnet_status status) {
  switch (status) {
    case REFNET_OK: return "ok";
    case REFNET_ERR_INVALID_ARGUMENT: return "invalid argument";
    case REFNET_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case REFNET_ERR_PARSE: return "parse error";
    case REFNET_ERR_IO: return "i/o error";
    case REFNET_ERR_NOT_FACTORABLE: return "not factorable";
    case REFNET_ERR_NOT_CONVERGENT: return "not convergent";
    case REFNET_ERR_UNSUPPORTED_DEGREE: return "unsupported degree";
    case REFNET_ERR_DOMAIN: return "domain error";
    case REFNET_ERR_DEGREE_TOO_SMALL: return "degree too small";
    case REFNET_ERR_NOT_REFINABLE: return "not refinable";
    case REFNET_ERR_NO_FOLLOWING_LAYER: return "no following layer";
    case REFNET_ERR_EMPTY_DATASET: return "empty dataset";
    case REFNET_ERR_POSITION_OUT_OF_RANGE: return "position out of range";
    case REFNET_ERR_EMPTY_ARCHITECTURE: return "empty architecture";
    case REFNET_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case REFNET_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* refnet_last_error(void) { return g_last_error.c_str(); }

refnet_status refnet_spline_phi(int degree, double t, double* out) {
  return Guard([&] { RequireNonNull(out, "out"); *out = refnet::SplinePhi(degree, t); });
}

refnet_status refnet_spline_sigma(int degree, double t, double* out) {
  return Guard([&] { RequireNonNull(out, "out"); *out = refnet::SplineSigma(degree, t); });
}

refnet_status refnet_spline_sigma_prime(int degree, double t, double* out) {
  return Guard([&] { RequireNonNull(out, "out"); *out = refnet::SplineSigmaPrime(degree, t); });
}

refnet_status refnet_sigma_prime_from_value(int degree, double y, double* out) {
  return Guard([&] { RequireNonNull(out, "out"); *out = refnet::SigmaPrimeFromValue(degree, y); });
}

refnet_status refnet_activation_spline(int degree, refnet_activation** out) {
  return Guard([&] {
    RequireNonNull(out, "out");
    *out = new refnet_activation{refnet::Activation::Spline(degree)};
  });
}

refnet_status refnet_activation_identity(refnet_activation** out) {
  return Guard([&] {
    RequireNonNull(out, "out");
    *out = new refnet_activation{refnet::Activation::Identity()};
  });
}

refnet_status refnet_activation_tabulated(const double* mask, size_t mask_len, int levels,
                                          refnet_activation** out) {
  return Guard([&] {
    RequireNonNull(out, "out");
    RequireNonNull(mask, "mask");
    refnet::Mask m(std::vector<double>(mask, mask + mask_len));
    *out = new refnet_activation{refnet::Activation::Tabulated(
        std::move(m), levels <= 0 ? refnet::kDefaultTableLevels : levels)};
  });
}

refnet_status refnet_activation_parse(const char* spec, refnet_activation** out) {
  return Guard([&] {
    RequireNonNull(out, "out");
    RequireNonNull(spec, "spec");
    *out = new refnet_activation{refnet::ParseActivationSpec(spec)};
  });
}

void refnet_activation_destroy(refnet_activation* act) { delete act; }

refnet_activation_kind refnet_activation_get_kind(const refnet_activation* act) {
  switch (act->value.kind()) {
    case refnet::Activation::Kind::kSpline: return REFNET_ACT_SPLINE;
    case refnet::Activation::Kind::kIdentity: return REFNET_ACT_IDENTITY;
    case refnet::Activation::Kind::kTabulated: return REFNET_ACT_TABULATED;
  }
  return REFNET_ACT_IDENTITY;
}

int refnet_activation_degree(const refnet_activation* act) { return act->value.degree(); }

refnet_status refnet_activation_describe(const refnet_activation* act, char* buf, size_t cap,
                                         size_t* needed) {
  if (act == nullptr) return SetError(REFNET_ERR_INVALID_ARGUMENT, "act is NULL");
  return CopyString(act->value.Describe(), buf, cap, needed);
}

refnet_status refnet_activation_eval(const refnet_activation* act, double t, double* out) {
  return Guard([&] {
    RequireNonNull(act, "act");
    RequireNonNull(out, "out");
    *out = act->value.Evaluate(t);
  });
}

refnet_status refnet_activation_eval_prime(const refnet_activation* act, double t, double* out) {
  return Guard([&] {
    RequireNonNull(act, "act");
    RequireNonNull(out, "out");
    *out = act->value.Derivative(t);
  });
}

refnet_status refnet_activation_refinability(const refnet_activation* act, int identity_split,
                                             int* split_count, double* shift, double* coeffs,
                                             size_t cap) {
  refnet::RefinabilityData data;
  const refnet_status s = Guard([&] {
    RequireNonNull(act, "act");
    data = refnet::RefinabilityParams(act->value, identity_split <= 0 ? 2 : identity_split);
  });
  if (s != REFNET_OK) return s;
  if (split_count) *split_count = data.split_count;
  if (shift) *shift = data.shift;
  if (cap == 0 && coeffs == nullptr) return REFNET_OK;
  return GuardBuffer(cap, data.coeffs.size(), [&] {
    RequireNonNull(coeffs, "coeffs");
    std::copy(data.coeffs.begin(), data.coeffs.end(), coeffs);
  });
}

refnet_status refnet_activation_identity_sum(const refnet_activation* act, int copies,
                                             int* copies_out, double* shift,
                                             double* half_width, double* delta) {
  return Guard([&] {
    RequireNonNull(act, "act");
    const refnet::IdentitySumData data = refnet::IdentitySumParams(act->value, copies);
    if (copies_out) *copies_out = data.copies;
    if (shift) *shift = data.shift;
    if (half_width) *half_width = data.half_width;
    if (delta) *delta = data.delta;
  });
}

int refnet_activation_phi_symmetric(const refnet_activation* act) {
  return act != nullptr && act->value.phi_symmetric() ? 1 : 0;
}

refnet_status refnet_activation_table(const refnet_activation* act, int* level, double* origin,
                                      double* values, size_t cap, size_t* count) {
  if (act == nullptr) return SetError(REFNET_ERR_INVALID_ARGUMENT, "act is NULL");
  const refnet::DyadicTable* table = act->value.table();
  if (table == nullptr)
    return SetError(REFNET_ERR_INVALID_ARGUMENT, act->value.Describe() + " has no table");
  if (level) *level = table->level;
  if (origin) *origin = table->origin;
  if (count) *count = table->values.size();
  if (cap == 0 && values == nullptr) return REFNET_OK;
  return GuardBuffer(cap, table->values.size(), [&] {
    RequireNonNull(values, "values");
    std::copy(table->values.begin(), table->values.end(), values);
  });
}

refnet_status refnet_dataset_load(const char* path, refnet_dataset** out) {
  return Guard([&] {
    RequireNonNull(path, "path");
    RequireNonNull(out, "out");
    *out = new refnet_dataset{refnet::LoadDataset(path)};
  });
}

refnet_status refnet_dataset_parse(const char* text, refnet_dataset** out) {
  return Guard([&] {
    RequireNonNull(text, "text");
    RequireNonNull(out, "out");
    *out = new refnet_dataset{refnet::ParseDataset(text)};
  });
}

refnet_status refnet_dataset_create(const double* inputs, const double* targets, size_t count,
                                    size_t input_dim, size_t target_dim, refnet_dataset** out) {
  return Guard([&] {
    RequireNonNull(out, "out");
    if (count > 0) {
      RequireNonNull(inputs, "inputs");
      if (target_dim > 0) RequireNonNull(targets, "targets");
    }
    if (input_dim == 0)
      refnet::Fail(refnet::ErrorCode::kInvalidArgument, "input_dim must be positive");
    refnet::Dataset data;
    data.input_dim = input_dim;
    data.target_dim = target_dim;
    data.inputs = Rows(inputs, count, input_dim);
    data.targets = target_dim > 0 ? Rows(targets, count, target_dim)
                                  : std::vector<refnet::Vector>(count);
    *out = new refnet_dataset{std::move(data)};
  });
}

void refnet_dataset_destroy(refnet_dataset* data) { delete data; }

refnet_status refnet_dataset_shape(const refnet_dataset* data, size_t* count, size_t* input_dim,
                                   size_t* target_dim) {
  return Guard([&] {
    RequireNonNull(data, "data");
    if (count) *count = data->value.size();
    if (input_dim) *input_dim = data->value.input_dim;
    if (target_dim) *target_dim = data->value.target_dim;
  });
}

refnet_status refnet_dataset_inputs(const refnet_dataset* data, double* out, size_t cap,
                                    size_t* needed) {
  if (data == nullptr) return SetError(REFNET_ERR_INVALID_ARGUMENT, "data is NULL");
  const std::size_t n = data->value.size() * data->value.input_dim;
  if (needed) *needed = n;
  if (cap == 0 && out == nullptr) return REFNET_OK;
  return GuardBuffer(cap, n, [&] {
    RequireNonNull(out, "out");
    for (const refnet::Vector& x : data->value.inputs) out = std::copy(x.begin(), x.end(), out);
  });
}

refnet_status refnet_network_init_random(const size_t* dims, size_t num_dims,
                                         const refnet_activation* hidden_act,
                                         const refnet_activation* output_act, uint64_t seed,
                                         refnet_network** out) {
  return Guard([&] {
    RequireNonNull(out, "out");
    RequireNonNull(hidden_act, "hidden_act");
    if (num_dims > 0) RequireNonNull(dims, "dims");
    std::optional<refnet::Activation> output;
    if (output_act) output = output_act->value;
    *out = new refnet_network{refnet::InitRandom(std::span<const std::size_t>(dims, num_dims),
                                                 hidden_act->value, seed, output)};
  });
}

refnet_status refnet_network_load(const char* path, refnet_network** out) {
  return Guard([&] {
    RequireNonNull(path, "path");
    RequireNonNull(out, "out");
    *out = new refnet_network{refnet::LoadNetwork(path)};
  });
}

refnet_status refnet_network_parse(const char* text, refnet_network** out) {
  return Guard([&] {
    RequireNonNull(text, "text");
    RequireNonNull(out, "out");
    *out = new refnet_network{refnet::DeserializeNetwork(text)};
  });
}

refnet_status refnet_network_save(const refnet_network* net, const char* path) {
  return Guard([&] {
    RequireNonNull(net, "net");
    RequireNonNull(path, "path");
    refnet::SaveNetwork(net->value, path);
  });
}

refnet_status refnet_network_serialize(const refnet_network* net, char* buf, size_t cap,
                                       size_t* needed) {
  if (net == nullptr) return SetError(REFNET_ERR_INVALID_ARGUMENT, "net is NULL");
  return CopyString(refnet::SerializeNetwork(net->value), buf, cap, needed);
}

void refnet_network_destroy(refnet_network* net) { delete net; }

size_t refnet_network_layer_count(const refnet_network* net) { return net->value.size(); }
size_t refnet_network_input_dim(const refnet_network* net) { return net->value.input_dim(); }
size_t refnet_network_output_dim(const refnet_network* net) { return net->value.output_dim(); }

refnet_status refnet_network_layer_shape(const refnet_network* net, size_t layer, size_t* rows,
                                         size_t* cols) {
  return Guard([&] {
    RequireNonNull(net, "net");
    if (layer >= net->value.size())
      refnet::Fail(refnet::ErrorCode::kPositionOutOfRange,
                   "layer " + std::to_string(layer) + " does not exist");
    if (rows) *rows = net->value.layer(layer).out_dim();
    if (cols) *cols = net->value.layer(layer).in_dim();
  });
}

refnet_status refnet_network_layer_activation(const refnet_network* net, size_t layer,
                                              refnet_activation** out) {
  return Guard([&] {
    RequireNonNull(net, "net");
    RequireNonNull(out, "out");
    if (layer >= net->value.size())
      refnet::Fail(refnet::ErrorCode::kPositionOutOfRange,
                   "layer " + std::to_string(layer) + " does not exist");
    *out = new refnet_activation{net->value.layer(layer).activation};
  });
}

refnet_status refnet_network_forward(const refnet_network* net, const double* x, size_t x_len,
                                     double* y, size_t y_cap) {
  refnet::Vector result;
  const refnet_status s = Guard([&] {
    RequireNonNull(net, "net");
    if (x_len > 0) RequireNonNull(x, "x");
    if (!net->value.empty() && x_len != net->value.input_dim())
      refnet::Fail(refnet::ErrorCode::kDimensionMismatch,
                   "input has " + std::to_string(x_len) + " components, network expects " +
                       std::to_string(net->value.input_dim()));
    result = refnet::Forward(net->value, std::span<const double>(x, x_len));
  });
  if (s != REFNET_OK) return s;
  return GuardBuffer(y_cap, result.size(), [&] {
    if (!result.empty()) RequireNonNull(y, "y");
    std::copy(result.begin(), result.end(), y);
  });
}

int refnet_network_equal(const refnet_network* a, const refnet_network* b) {
  return a != nullptr && b != nullptr && a->value == b->value ? 1 : 0;
}

refnet_status refnet_widen(const refnet_network* net, size_t layer, const size_t* neurons,
                           size_t count, refnet_network** out) {
  return Guard([&] {
    RequireNonNull(net, "net");
    RequireNonNull(out, "out");
    if (neurons == nullptr || count == 0) {
      *out = new refnet_network{refnet::WidenLayerAll(net->value, layer)};
    } else {
      *out = new refnet_network{
          refnet::WidenLayer(net->value, layer, std::span<const std::size_t>(neurons, count))};
    }
  });
}

namespace {

refnet::InsertVariant ToVariant(refnet_insert_variant v) {
  if (v == REFNET_INSERT_PRE) return refnet::InsertVariant::kPre;
  if (v == REFNET_INSERT_POST) return refnet::InsertVariant::kPost;
  refnet::Fail(refnet::ErrorCode::kInvalidArgument, "unknown insertion variant");
}

}  // namespace

refnet_status refnet_insert_layer(const refnet_network* net, size_t position,
                                  const refnet_activation* sigma0, int copies,
                                  refnet_insert_variant variant, const refnet_dataset* data,
                                  refnet_network** out, refnet_growth_report* report) {
  return Guard([&] {
    RequireNonNull(net, "net");
    RequireNonNull(sigma0, "sigma0");
    RequireNonNull(data, "data");
    RequireNonNull(out, "out");
    refnet::Insertion ins = refnet::InsertLayer(net->value, position, sigma0->value, copies,
                                                ToVariant(variant), data->value);
    if (report) {
      report->beta = ins.report.beta;
      report->max_abs_deviation = ins.report.max_abs_deviation;
      report->new_width = ins.network.layer(position - 1).out_dim();
      const std::string& desc = ins.report.omega_desc;
      const std::size_t n = std::min(desc.size(), sizeof(report->omega_desc) - 1);
      std::memcpy(report->omega_desc, desc.data(), n);
      report->omega_desc[n] = '\0';
    }
    *out = new refnet_network{std::move(ins.network)};
  });
}

refnet_status refnet_check_domain(const refnet_network* net, size_t position,
                                  refnet_insert_variant variant, double beta,
                                  const refnet_activation* sigma0, int copies, const double* x,
                                  size_t x_len, int* inside) {
  return Guard([&] {
    RequireNonNull(net, "net");
    RequireNonNull(sigma0, "sigma0");
    RequireNonNull(inside, "inside");
    if (x_len > 0) RequireNonNull(x, "x");
    const refnet::IdentitySumData params = refnet::IdentitySumParams(sigma0->value, copies);
    *inside = refnet::CheckDomain(net->value, position, ToVariant(variant), beta, params,
                                  std::span<const double>(x, x_len))
                  ? 1
                  : 0;
  });
}

refnet_status refnet_random_inputs(uint64_t seed, size_t count, size_t dim, double range,
                                   double* out) {
  return Guard([&] {
    if (count * dim > 0) RequireNonNull(out, "out");
    if (!(range >= 0.0) || !std::isfinite(range))
      refnet::Fail(refnet::ErrorCode::kInvalidArgument, "range must be finite and >= 0");
    for (const refnet::Vector& x : refnet::RandomInputs(seed, count, dim, range))
      out = std::copy(x.begin(), x.end(), out);
  });
}

refnet_status refnet_output_deviation(const refnet_network* a, const refnet_network* b,
                                      const double* inputs, size_t count, double* max_abs,
                                      double* mean_abs) {
  return Guard([&] {
    RequireNonNull(a, "a");
    RequireNonNull(b, "b");
    if (count > 0) RequireNonNull(inputs, "inputs");
    const auto rows = Rows(inputs, count, a->value.input_dim());
    const refnet::DeviationStats stats = refnet::MeasureDeviation(a->value, b->value, rows);
    if (max_abs) *max_abs = stats.max_abs;
    if (mean_abs) *mean_abs = stats.mean_abs;
  });
}

refnet_status refnet_mean_loss(const refnet_network* net, const refnet_dataset* data,
                               double* out) {
  return Guard([&] {
    RequireNonNull(net, "net");
    RequireNonNull(data, "data");
    RequireNonNull(out, "out");
    *out = refnet::MeanLoss(net->value, data->value);
  });
}

refnet_status refnet_train(const refnet_network* net, const refnet_dataset* data, size_t epochs,
                           double learning_rate, refnet_network** out, double* losses) {
  return Guard([&] {
    RequireNonNull(net, "net");
    RequireNonNull(data, "data");
    RequireNonNull(out, "out");
    refnet::TrainResult result = refnet::Train(net->value, data->value, epochs, learning_rate);
    if (losses) std::copy(result.losses.begin(), result.losses.end(), losses);
    *out = new refnet_network{std::move(result.network)};
  });
}

}  // extern "C"
