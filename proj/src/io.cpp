#include "refnet/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "refnet/error.hpp"

namespace refnet {

using nlohmann::json;

namespace {

json ActivationToJson(const Activation& act) {
  switch (act.kind()) {
    case Activation::Kind::kSpline:
      return {{"kind", "spline"}, {"d", act.degree()}};
    case Activation::Kind::kIdentity:
      return {{"kind", "identity"}};
    case Activation::Kind::kTabulated:
      return {{"kind", "tabulated"}, {"mask", act.mask()->coeffs()}, {"levels", act.levels()}};
  }
  return nullptr;
}

[[noreturn]] void ParseFail(const std::string& where, const std::string& what) {
  Fail(ErrorCode::kParse, where + ": " + what);
}

const json& Field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) ParseFail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) ParseFail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

double Number(const json& v, const std::string& where) {
  if (!v.is_number()) ParseFail(where, "expected a number, got " + std::string(v.type_name()));
  const double x = v.get<double>();
  if (!std::isfinite(x)) ParseFail(where, "non-finite number");
  return x;
}

int Integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) ParseFail(where, "expected an integer");
  return v.get<int>();
}

Vector NumberArray(const json& v, const std::string& where) {
  if (!v.is_array()) ParseFail(where, "expected an array");
  Vector out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(Number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Activation ActivationFromJson(const json& v, const std::string& where) {
  const json& kind_field = Field(v, "kind", where);
  if (!kind_field.is_string()) ParseFail(where + ".kind", "expected a string");
  const std::string kind = kind_field.get<std::string>();
  try {
    if (kind == "spline") return Activation::Spline(Integer(Field(v, "d", where), where + ".d"));
    if (kind == "identity") return Activation::Identity();
    if (kind == "tabulated") {
      Mask mask(NumberArray(Field(v, "mask", where), where + ".mask"));
      int levels = kDefaultTableLevels;
      if (v.contains("levels")) levels = Integer(v["levels"], where + ".levels");
      return Activation::Tabulated(std::move(mask), levels);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    ParseFail(where, e.what());
  }
  ParseFail(where + ".kind", "unknown activation kind \"" + kind + "\"");
}

LayerOp LayerFromJson(const json& v, const std::string& where) {
  LayerOp layer;
  const json& w = Field(v, "W", where);
  if (!w.is_array()) ParseFail(where + ".W", "expected an array of rows");
  std::vector<Vector> rows;
  for (std::size_t r = 0; r < w.size(); ++r)
    rows.push_back(NumberArray(w[r], where + ".W[" + std::to_string(r) + "]"));
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  layer.weights = Matrix(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols)
      ParseFail(where + ".W[" + std::to_string(r) + "]",
                "row has " + std::to_string(rows[r].size()) + " entries, expected " +
                    std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) layer.weights(r, c) = rows[r][c];
  }
  layer.bias = NumberArray(Field(v, "b", where), where + ".b");
  if (layer.bias.size() != layer.weights.rows())
    ParseFail(where + ".b", "has " + std::to_string(layer.bias.size()) +
                                " entries but W has " + std::to_string(layer.weights.rows()) +
                                " rows");
  layer.activation = ActivationFromJson(Field(v, "act", where), where + ".act");
  return layer;
}

}  // namespace

std::string SerializeNetwork(const Network& net) {
  json layers = json::array();
  for (const LayerOp& layer : net.layers()) {
    json w = json::array();
    for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
      const auto row = layer.weights.row(r);
      w.push_back(Vector(row.begin(), row.end()));
    }
    layers.push_back({{"W", std::move(w)}, {"b", layer.bias}, {"act", ActivationToJson(layer.activation)}});
  }
  return json{{"layers", std::move(layers)}}.dump(1) + "\n";
}

Network DeserializeNetwork(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kParse, std::string("malformed network document: ") + e.what());
  }
  const json& layers = Field(doc, "layers", "document");
  if (!layers.is_array()) ParseFail("layers", "expected an array");
  std::vector<LayerOp> ops;
  for (std::size_t j = 0; j < layers.size(); ++j)
    ops.push_back(LayerFromJson(layers[j], "layers[" + std::to_string(j) + "]"));
  try {
    return Network(std::move(ops));
  } catch (const Error& e) {
    Fail(ErrorCode::kParse, std::string("layers: ") + e.what());
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) Fail(ErrorCode::kIo, "short write to " + path.string());
}

Network LoadNetwork(const std::filesystem::path& path) {
  try {
    return DeserializeNetwork(ReadFile(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParse) throw;
    Fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

void SaveNetwork(const Network& net, const std::filesystem::path& path) {
  WriteFile(path, SerializeNetwork(net));
}

namespace {

bool IsSeparator(char c) { return c == ',' || c == ';' || c == ' ' || c == '\t' || c == '\r'; }

std::vector<double> SplitNumbers(std::string_view line, const std::string& where) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && IsSeparator(line[i])) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !IsSeparator(line[j])) ++j;
    const std::string_view token = line.substr(i, j - i);
    double value = 0.0;
    const char* first = token.data();
    if (!token.empty() && token.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value))
      ParseFail(where, "not a number: \"" + std::string(token) + "\"");
    out.push_back(value);
    i = j;
  }
  return out;
}

std::string_view StripComment(std::string_view line) {
  const auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

}  // namespace

Dataset ParseDataset(std::string_view text) {
  Dataset data;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    if (!have_header) {
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      unsigned long in = 0, out = 0;
      const std::string header(line);
      char tail = 0;
      if (std::sscanf(header.c_str(), " # in=%lu out=%lu %c", &in, &out, &tail) != 2 || in == 0)
        ParseFail(where, "expected header \"# in=<n> out=<m>\"");
      data.input_dim = in;
      data.target_dim = out;
      have_header = true;
      continue;
    }
    line = StripComment(line);
    const std::vector<double> values = SplitNumbers(line, where);
    if (values.empty()) continue;
    if (values.size() != data.input_dim + data.target_dim)
      ParseFail(where, "expected " + std::to_string(data.input_dim + data.target_dim) +
                           " columns, got " + std::to_string(values.size()));
    const auto split = values.begin() + static_cast<std::ptrdiff_t>(data.input_dim);
    data.inputs.emplace_back(values.begin(), split);
    data.targets.emplace_back(split, values.end());
  }
  if (!have_header) Fail(ErrorCode::kParse, "dataset: missing header \"# in=<n> out=<m>\"");
  return data;
}

Dataset LoadDataset(const std::filesystem::path& path) {
  try {
    return ParseDataset(ReadFile(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParse) throw;
    Fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

std::string FormatDataset(const Dataset& data) {
  std::string out = "# in=" + std::to_string(data.input_dim) +
                    " out=" + std::to_string(data.target_dim) + "\n";
  for (std::size_t k = 0; k < data.size(); ++k) {
    bool first = true;
    for (const Vector* v : {&data.inputs[k], &data.targets[k]})
      for (double x : *v) {
        if (!first) out += ',';
        out += FormatNumber(x);
        first = false;
      }
    out += '\n';
  }
  return out;
}

Mask ParseMask(std::string_view text) {
  std::vector<double> coeffs;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    ++line_no;
    for (double v : SplitNumbers(StripComment(text.substr(pos, end - pos)),
                                 "mask line " + std::to_string(line_no)))
      coeffs.push_back(v);
    pos = end + 1;
  }
  try {
    return Mask(std::move(coeffs));
  } catch (const Error& e) {
    Fail(ErrorCode::kParse, std::string("mask: ") + e.what());
  }
}

Activation ParseActivationSpec(std::string_view spec) {
  if (spec == "identity") return Activation::Identity();
  if (spec.starts_with("spline:")) {
    const std::string_view digits = spec.substr(7);
    int d = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
    if (ec != std::errc{} || ptr != digits.data() + digits.size())
      Fail(ErrorCode::kInvalidArgument, "bad spline degree in \"" + std::string(spec) + "\"");
    if (d < 1) Fail(ErrorCode::kInvalidArgument, "degree must be ≥ 1");
    return Activation::Spline(d);
  }
  if (spec.starts_with("mask:")) {
    std::string_view rest = spec.substr(5);
    int levels = kDefaultTableLevels;
    if (const auto at = rest.rfind('@'); at != std::string_view::npos) {
      const std::string_view lv = rest.substr(at + 1);
      auto [ptr, ec] = std::from_chars(lv.data(), lv.data() + lv.size(), levels);
      if (ec != std::errc{} || ptr != lv.data() + lv.size())
        Fail(ErrorCode::kInvalidArgument, "bad cascade level in \"" + std::string(spec) + "\"");
      rest = rest.substr(0, at);
    }
    if (rest.empty()) Fail(ErrorCode::kInvalidArgument, "mask: needs a file name");
    return Activation::Tabulated(ParseMask(ReadFile(std::filesystem::path(rest))), levels);
  }
  Fail(ErrorCode::kInvalidArgument,
       "unknown activation \"" + std::string(spec) + "\" (spline:<d>, identity, mask:<file>)");
}

}  // namespace refnet
