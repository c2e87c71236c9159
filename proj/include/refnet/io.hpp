#pragma once

// File formats.
//
// Network document (JSON):
//   {"layers": [{"W": [[...], ...], "b": [...], "act": {...}}, ...]}
// with activation descriptors
//   {"kind": "spline", "d": 2} | {"kind": "identity"} |
//   {"kind": "tabulated", "mask": [...], "levels": 12}
// Doubles are written in shortest round-trip form, so reading a written
// network reproduces every weight bit for bit.
//
// Dataset: a header line "# in=<n> out=<m>", then one sample per line with
// n input columns followed by m target columns, separated by commas,
// semicolons, tabs or spaces. Blank lines and further '#' lines are skipped.
//
// Mask file: real coefficients a_0 .. a_{d+1} separated by commas or
// whitespace; '#' starts a comment.

#include <filesystem>
#include <string>
#include <string_view>

#include "refnet/activation.hpp"
#include "refnet/network.hpp"

namespace refnet {

std::string SerializeNetwork(const Network& net);
// Throws kParse with the offending field path, e.g. "layers[1].W[2][0]".
Network DeserializeNetwork(std::string_view text);

Network LoadNetwork(const std::filesystem::path& path);
void SaveNetwork(const Network& net, const std::filesystem::path& path);

Dataset ParseDataset(std::string_view text);
Dataset LoadDataset(const std::filesystem::path& path);
std::string FormatDataset(const Dataset& data);

Mask ParseMask(std::string_view text);

// Command-line activation spec: "spline:<d>", "identity", or
// "mask:<file>[@<levels>]".
Activation ParseActivationSpec(std::string_view spec);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace refnet
