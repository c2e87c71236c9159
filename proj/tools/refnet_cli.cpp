// refnet: build, train, grow, verify and inspect networks.
//
// Exit codes: 0 ok, 1 verification failed, 2 usage or parse error,
// 3 mathematical precondition violated, 4 data or file problem.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "refnet/refnet.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMath = 3;
constexpr int kExitData = 4;

struct Failure {
  int exit_code;
  std::string message;
};

int ExitCodeFor(refnet_status s) {
  switch (s) {
    case REFNET_OK:
      return kExitOk;
    case REFNET_ERR_INVALID_ARGUMENT:
    case REFNET_ERR_DIMENSION_MISMATCH:
    case REFNET_ERR_PARSE:
    case REFNET_ERR_POSITION_OUT_OF_RANGE:
    case REFNET_ERR_EMPTY_ARCHITECTURE:
      return kExitUsage;
    case REFNET_ERR_IO:
    case REFNET_ERR_EMPTY_DATASET:
    case REFNET_ERR_BUFFER_TOO_SMALL:
    case REFNET_ERR_INTERNAL:
      return kExitData;
    default:
      return kExitMath;
  }
}

void Check(refnet_status s) {
  if (s != REFNET_OK)
    throw Failure{ExitCodeFor(s), std::string(refnet_status_name(s)) + ": " + refnet_last_error()};
}

struct ActDeleter {
  void operator()(refnet_activation* p) const { refnet_activation_destroy(p); }
};
struct NetDeleter {
  void operator()(refnet_network* p) const { refnet_network_destroy(p); }
};
struct DataDeleter {
  void operator()(refnet_dataset* p) const { refnet_dataset_destroy(p); }
};
using Act = std::unique_ptr<refnet_activation, ActDeleter>;
using Net = std::unique_ptr<refnet_network, NetDeleter>;
using Data = std::unique_ptr<refnet_dataset, DataDeleter>;

std::string Fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc{} ? std::string(buf, end) : std::string("?");
}

std::string FmtList(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + Fmt(v[i]);
  return out + "]";
}

Act ParseAct(const std::string& spec) {
  refnet_activation* p = nullptr;
  Check(refnet_activation_parse(spec.c_str(), &p));
  return Act(p);
}

Net LoadNet(const std::string& path) {
  refnet_network* p = nullptr;
  Check(refnet_network_load(path.c_str(), &p));
  return Net(p);
}

Data LoadData(const std::string& path) {
  refnet_dataset* p = nullptr;
  Check(refnet_dataset_load(path.c_str(), &p));
  return Data(p);
}

std::vector<double> DataInputs(const refnet_dataset* data, std::size_t* count) {
  std::size_t in = 0, out = 0;
  Check(refnet_dataset_shape(data, count, &in, &out));
  std::vector<double> xs(*count * in);
  std::size_t needed = 0;
  Check(refnet_dataset_inputs(data, xs.data(), xs.size(), &needed));
  return xs;
}

std::string Describe(const refnet_activation* act) {
  std::size_t needed = 0;
  refnet_activation_describe(act, nullptr, 0, &needed);
  std::string s(needed, '\0');
  Check(refnet_activation_describe(act, s.data(), s.size(), &needed));
  s.resize(needed ? needed - 1 : 0);
  return s;
}

Act LayerAct(const refnet_network* net, std::size_t j) {
  refnet_activation* p = nullptr;
  Check(refnet_network_layer_activation(net, j, &p));
  return Act(p);
}

std::string Widths(const refnet_network* net) {
  std::string out = std::to_string(refnet_network_input_dim(net));
  for (std::size_t j = 0; j < refnet_network_layer_count(net); ++j) {
    std::size_t rows = 0, cols = 0;
    Check(refnet_network_layer_shape(net, j, &rows, &cols));
    out += "-" + std::to_string(rows);
  }
  return out;
}

void PrintLayers(const refnet_network* net) {
  for (std::size_t j = 0; j < refnet_network_layer_count(net); ++j) {
    std::size_t rows = 0, cols = 0;
    Check(refnet_network_layer_shape(net, j, &rows, &cols));
    std::printf("layer %zu: %zux%zu %s\n", j, rows, cols, Describe(LayerAct(net, j).get()).c_str());
  }
}

void Save(const refnet_network* net, const std::string& path) {
  Check(refnet_network_save(net, path.c_str()));
  std::printf("wrote %s\n", path.c_str());
}

struct Deviation {
  double max = 0.0;
  double mean = 0.0;
};

Deviation Measure(const refnet_network* a, const refnet_network* b, const std::vector<double>& xs,
                  std::size_t count) {
  Deviation d;
  if (count > 0) Check(refnet_output_deviation(a, b, xs.data(), count, &d.max, &d.mean));
  return d;
}

std::vector<double> RandomInputs(std::uint64_t seed, std::size_t count, std::size_t dim,
                                 double range) {
  std::vector<double> xs(count * dim);
  Check(refnet_random_inputs(seed, count, dim, range, xs.data()));
  return xs;
}

// ---- init -----------------------------------------------------------------

struct InitArgs {
  std::vector<std::size_t> dims;
  std::string act = "spline:2";
  std::string out_act;
  std::uint64_t seed = 0;
  std::string out;
};

int RunInit(const InitArgs& a) {
  Act hidden = ParseAct(a.act);
  Act output = a.out_act.empty() ? Act() : ParseAct(a.out_act);
  refnet_network* p = nullptr;
  Check(refnet_network_init_random(a.dims.data(), a.dims.size(), hidden.get(), output.get(), a.seed, &p));
  Net net(p);
  std::printf("architecture: %s\n", Widths(net.get()).c_str());
  PrintLayers(net.get());
  Save(net.get(), a.out);
  return kExitOk;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string net, data, out;
  std::size_t epochs = 0;
  double lr = 0.01;
};

int RunTrain(const TrainArgs& a) {
  Net net = LoadNet(a.net);
  Data data = LoadData(a.data);
  std::vector<double> losses(a.epochs + 1);
  refnet_network* p = nullptr;
  Check(refnet_train(net.get(), data.get(), a.epochs, a.lr, &p, losses.data()));
  Net trained(p);
  for (std::size_t e = 0; e < losses.size(); ++e)
    std::printf("epoch %zu loss %s\n", e, Fmt(losses[e]).c_str());
  Save(trained.get(), a.out);
  return kExitOk;
}

// ---- widen ----------------------------------------------------------------

struct WidenArgs {
  std::string net, out;
  std::size_t layer = 0;
  std::string neurons = "all";
  std::size_t samples = 1000;
  double range = 10.0;
  std::uint64_t seed = 0;
};

std::vector<std::size_t> ParseNeurons(const std::string& text) {
  std::vector<std::size_t> out;
  if (text == "all") return out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + comma, v);
    if (ec != std::errc{} || ptr != text.data() + comma || comma == pos)
      throw Failure{kExitUsage, "--neurons: expected \"all\" or a comma list of indices, got \"" + text + "\""};
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

int RunWiden(const WidenArgs& a) {
  const std::vector<std::size_t> neurons = ParseNeurons(a.neurons);
  Net net = LoadNet(a.net);
  refnet_network* p = nullptr;
  Check(refnet_widen(net.get(), a.layer, neurons.empty() ? nullptr : neurons.data(), neurons.size(), &p));
  Net wide(p);

  int split = 0;
  double tau = 0.0;
  Check(refnet_activation_refinability(LayerAct(net.get(), a.layer).get(), 0, &split, &tau, nullptr, 0));
  std::size_t before = 0, after = 0, cols = 0;
  Check(refnet_network_layer_shape(net.get(), a.layer, &before, &cols));
  Check(refnet_network_layer_shape(wide.get(), a.layer, &after, &cols));

  const std::size_t dim = refnet_network_input_dim(net.get());
  const Deviation dev =
      Measure(net.get(), wide.get(), RandomInputs(a.seed, a.samples, dim, a.range), a.samples);

  Save(wide.get(), a.out);
  std::printf("growth report\n");
  std::printf("  operation: widen layer %zu (%s)\n", a.layer,
              neurons.empty() ? "all neurons" : ("neurons " + a.neurons).c_str());
  std::printf("  split: A=%d, width %zu -> %zu\n", split, before, after);
  std::printf("  beta: 1\n");
  std::printf("  widths: %s -> %s\n", Widths(net.get()).c_str(), Widths(wide.get()).c_str());
  std::printf("  max_abs_deviation: %s\n", Fmt(dev.max).c_str());
  std::printf("  mean_abs_deviation: %s\n", Fmt(dev.mean).c_str());
  std::printf("  samples: %zu random inputs in [-%s,%s]^%zu, seed %llu\n", a.samples,
              Fmt(a.range).c_str(), Fmt(a.range).c_str(), dim,
              static_cast<unsigned long long>(a.seed));
  return kExitOk;
}

// ---- insert ---------------------------------------------------------------

struct InsertArgs {
  std::string net, sigma0 = "spline:2", variant = "post", data, out;
  std::size_t pos = 1;
  int copies = 0;
};

int RunInsert(const InsertArgs& a) {
  Net net = LoadNet(a.net);
  Act sigma0 = ParseAct(a.sigma0);
  Data data = LoadData(a.data);
  const refnet_insert_variant variant = a.variant == "pre" ? REFNET_INSERT_PRE : REFNET_INSERT_POST;
  refnet_network* p = nullptr;
  refnet_growth_report report{};
  Check(refnet_insert_layer(net.get(), a.pos, sigma0.get(), a.copies, variant, data.get(), &p, &report));
  Net deep(p);
  std::size_t count = 0, in = 0, out = 0;
  Check(refnet_dataset_shape(data.get(), &count, &in, &out));

  Save(deep.get(), a.out);
  std::printf("growth report\n");
  std::printf("  operation: insert %s at position %zu, sigma0 %s, B=%d\n", a.variant.c_str(), a.pos,
              a.sigma0.c_str(), a.copies);
  std::printf("  new layer width: %zu\n", report.new_width);
  std::printf("  beta: %s\n", Fmt(report.beta).c_str());
  std::printf("  omega: %s\n", report.omega_desc);
  std::printf("  widths: %s -> %s\n", Widths(net.get()).c_str(), Widths(deep.get()).c_str());
  std::printf("  max_abs_deviation: %s\n", Fmt(report.max_abs_deviation).c_str());
  std::printf("  samples: %zu data points\n", count);
  return kExitOk;
}

// ---- verify ---------------------------------------------------------------

struct VerifyArgs {
  std::string old_net, new_net, data;
  std::size_t random = 0;
  double range = 10.0;
  std::uint64_t seed = 0;
  double tol = 1e-9;
};

int RunVerify(const VerifyArgs& a) {
  Net old_net = LoadNet(a.old_net);
  Net new_net = LoadNet(a.new_net);
  const std::size_t dim = refnet_network_input_dim(old_net.get());
  if (dim != refnet_network_input_dim(new_net.get()) ||
      refnet_network_output_dim(old_net.get()) != refnet_network_output_dim(new_net.get()))
    throw Failure{kExitUsage, "dimension mismatch: " + Widths(old_net.get()) + " vs " +
                                  Widths(new_net.get())};

  double worst = 0.0;
  if (!a.data.empty()) {
    Data data = LoadData(a.data);
    std::size_t count = 0, in = 0, out = 0;
    Check(refnet_dataset_shape(data.get(), &count, &in, &out));
    if (in != dim)
      throw Failure{kExitUsage, "dimension mismatch: data has " + std::to_string(in) +
                                    " inputs, network expects " + std::to_string(dim)};
    const Deviation d = Measure(old_net.get(), new_net.get(), DataInputs(data.get(), &count), count);
    std::printf("data: %zu samples, max %s, mean %s\n", count, Fmt(d.max).c_str(), Fmt(d.mean).c_str());
    worst = std::max(worst, d.max);
  }
  const std::size_t random = (a.data.empty() && a.random == 0) ? 1000 : a.random;
  if (random > 0) {
    const Deviation d =
        Measure(old_net.get(), new_net.get(), RandomInputs(a.seed, random, dim, a.range), random);
    std::printf("random: %zu inputs in [-%s,%s]^%zu seed %llu, max %s, mean %s\n", random,
                Fmt(a.range).c_str(), Fmt(a.range).c_str(), dim,
                static_cast<unsigned long long>(a.seed), Fmt(d.max).c_str(), Fmt(d.mean).c_str());
    worst = std::max(worst, d.max);
  }
  const bool ok = worst <= a.tol;
  std::printf("%s: max deviation %s, tolerance %s\n", ok ? "PASS" : "FAIL", Fmt(worst).c_str(),
              Fmt(a.tol).c_str());
  return ok ? kExitOk : kExitVerifyFailed;
}

// ---- dump-activation ------------------------------------------------------

struct DumpArgs {
  std::string act;
  double from = -3.0, to = 3.0, step = 0.01;
  bool prime = false;
};

int RunDump(const DumpArgs& a) {
  if (!(a.step > 0.0) || !std::isfinite(a.step))
    throw Failure{kExitUsage, "--step must be positive"};
  if (!(a.to >= a.from)) throw Failure{kExitUsage, "--to must not be below --from"};
  const double n = std::floor((a.to - a.from) / a.step + 1e-9);
  if (n > 1e7) throw Failure{kExitUsage, "too many points; increase --step"};
  Act act = ParseAct(a.act);
  for (std::size_t i = 0; i <= static_cast<std::size_t>(n); ++i) {
    const double t = a.from + static_cast<double>(i) * a.step;
    double y = 0.0;
    Check(a.prime ? refnet_activation_eval_prime(act.get(), t, &y)
                  : refnet_activation_eval(act.get(), t, &y));
    std::printf("%s %s\n", Fmt(t).c_str(), Fmt(y).c_str());
  }
  return kExitOk;
}

// ---- info -----------------------------------------------------------------

void PrintActivationInfo(const refnet_activation* act) {
  const refnet_activation_kind kind = refnet_activation_get_kind(act);
  int split = 0;
  double tau = 0.0;
  const refnet_status s = refnet_activation_refinability(act, 0, &split, &tau, nullptr, 0);
  if (s == REFNET_OK) {
    std::vector<double> a(static_cast<std::size_t>(split));
    Check(refnet_activation_refinability(act, 0, &split, &tau, a.data(), a.size()));
    std::printf("  refinable: A=%d τ=%s a=%s%s\n", split, Fmt(tau).c_str(), FmtList(a).c_str(),
                kind == REFNET_ACT_IDENTITY ? " (any A ≥ 1 with τ=(A-1)/2, a_l=1/(2A))" : "");
  } else {
    std::printf("  not refinable: %s\n", refnet_last_error());
  }
  if (kind == REFNET_ACT_TABULATED && !refnet_activation_phi_symmetric(act))
    std::printf("  warning: basic limit function is not symmetric\n");

  if (kind == REFNET_ACT_IDENTITY) {
    std::printf("  sums identity on all of ℝ (B=1, μ=0)\n");
    return;
  }
  const int d = refnet_activation_degree(act);
  std::printf("  sums identity for B ≥ %d: μ=(B-1)/2, I=[-(B-%d)/2,(B-%d)/2]\n", d, d - 1, d - 1);
  for (int b = d; b <= d + 2; ++b) {
    int copies = 0;
    double mu = 0.0, half = 0.0, delta = 0.0;
    if (refnet_activation_identity_sum(act, b, &copies, &mu, &half, &delta) != REFNET_OK) continue;
    std::printf("    B=%d μ=%s I=[%s,%s]\n", copies, Fmt(mu).c_str(), Fmt(-half).c_str(),
                Fmt(half).c_str());
  }
}

int RunInfo(const std::string& path) {
  Net net = LoadNet(path);
  std::printf("layers: %zu\n", refnet_network_layer_count(net.get()));
  std::printf("widths: %s\n", Widths(net.get()).c_str());
  for (std::size_t j = 0; j < refnet_network_layer_count(net.get()); ++j) {
    std::size_t rows = 0, cols = 0;
    Check(refnet_network_layer_shape(net.get(), j, &rows, &cols));
    Act act = LayerAct(net.get(), j);
    std::printf("layer %zu: %zux%zu %s\n", j, rows, cols, Describe(act.get()).c_str());
    PrintActivationInfo(act.get());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"refnet: networks with refinable, identity-summing activations"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  InitArgs init;
  auto* c_init = app.add_subcommand("init", "Create a randomly initialised network");
  c_init->add_option("--dims", init.dims, "Layer widths, input first (e.g. 2,4,1)")->required()->delimiter(',');
  c_init->add_option("--act", init.act, "Activation: spline:<d>, identity or mask:<file>[@levels]")
      ->capture_default_str();
  c_init->add_option("--out-act", init.out_act, "Activation of the last layer (default: --act)");
  c_init->add_option("--seed", init.seed, "Random seed")->capture_default_str();
  c_init->add_option("--out", init.out, "Output network file")->required();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Full-batch gradient descent on mean squared error");
  c_train->add_option("--net", train.net, "Network file")->required()->check(CLI::ExistingFile);
  c_train->add_option("--data", train.data, "Dataset file")->required()->check(CLI::ExistingFile);
  c_train->add_option("--epochs", train.epochs, "Number of epochs")->required();
  c_train->add_option("--lr", train.lr, "Learning rate")->capture_default_str();
  c_train->add_option("--out", train.out, "Output network file")->required();

  WidenArgs widen;
  auto* c_widen = app.add_subcommand("widen", "Split neurons of a layer without changing outputs");
  c_widen->add_option("--net", widen.net, "Network file")->required()->check(CLI::ExistingFile);
  c_widen->add_option("--layer", widen.layer, "Layer index (0 = first hidden layer)")->required();
  c_widen->add_option("--neurons", widen.neurons, "\"all\" or comma list of neuron indices")
      ->capture_default_str();
  c_widen->add_option("--out", widen.out, "Output network file")->required();
  c_widen->add_option("--samples", widen.samples, "Random inputs for the deviation check")
      ->capture_default_str();
  c_widen->add_option("--range", widen.range, "Random inputs are drawn from [-range,range]")
      ->capture_default_str();
  c_widen->add_option("--seed", widen.seed, "Seed for the random inputs")->capture_default_str();

  InsertArgs insert;
  auto* c_insert = app.add_subcommand("insert", "Insert a layer without changing outputs on the data");
  c_insert->add_option("--net", insert.net, "Network file")->required()->check(CLI::ExistingFile);
  c_insert->add_option("--pos", insert.pos, "Layer to split, counted from 1 (1..layers)")->required();
  c_insert->add_option("--sigma0", insert.sigma0, "Activation of the new layer")->capture_default_str();
  c_insert->add_option("--B", insert.copies, "Shifted copies per neuron")->required();
  c_insert->add_option("--variant", insert.variant, "pre or post")
      ->check(CLI::IsMember({"pre", "post"}))
      ->capture_default_str();
  c_insert->add_option("--data", insert.data, "Dataset the new layer must preserve")
      ->required()
      ->check(CLI::ExistingFile);
  c_insert->add_option("--out", insert.out, "Output network file")->required();

  VerifyArgs verify;
  auto* c_verify = app.add_subcommand("verify", "Compare the outputs of two networks");
  c_verify->add_option("--old", verify.old_net, "Reference network")->required()->check(CLI::ExistingFile);
  c_verify->add_option("--new", verify.new_net, "Network to check")->required()->check(CLI::ExistingFile);
  c_verify->add_option("--data", verify.data, "Dataset whose inputs are compared")->check(CLI::ExistingFile);
  c_verify->add_option("--random", verify.random, "Number of random inputs (1000 if no --data)");
  c_verify->add_option("--range", verify.range, "Random inputs are drawn from [-range,range]")
      ->capture_default_str();
  c_verify->add_option("--seed", verify.seed, "Seed for the random inputs")->capture_default_str();
  c_verify->add_option("--tol", verify.tol, "Maximum allowed absolute deviation")->capture_default_str();

  DumpArgs dump;
  auto* c_dump = app.add_subcommand("dump-activation", "Print an activation on a grid");
  c_dump->add_option("--act", dump.act, "spline:<d>, identity or mask:<file>[@levels]")->required();
  c_dump->add_option("--from", dump.from, "First abscissa")->capture_default_str();
  c_dump->add_option("--to", dump.to, "Last abscissa")->capture_default_str();
  c_dump->add_option("--step", dump.step, "Grid spacing")->capture_default_str();
  c_dump->add_flag("--prime", dump.prime, "Print the derivative instead");

  std::string info_net;
  auto* c_info = app.add_subcommand("info", "Describe a network and its activations");
  c_info->add_option("--net", info_net, "Network file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (c_init->parsed()) return RunInit(init);
    if (c_train->parsed()) return RunTrain(train);
    if (c_widen->parsed()) return RunWiden(widen);
    if (c_insert->parsed()) return RunInsert(insert);
    if (c_verify->parsed()) return RunVerify(verify);
    if (c_dump->parsed()) return RunDump(dump);
    if (c_info->parsed()) return RunInfo(info_net);
  } catch (const Failure& f) {
    std::fprintf(stderr, "refnet: %s\n", f.message.c_str());
    return f.exit_code;
  }
  return kExitUsage;
}
