#pragma once

// Function-preserving growth.
//
// Widening replaces a neuron of a layer with a refinable activation by A
// scaled and shifted copies; the output is unchanged for every input.
// Layer insertion splits a layer operator L = sigma(W x + b) in two with an
// activation that sums the identity; the output is unchanged on the set
// Omega of inputs whose propagated values, scaled by beta, land inside the
// identity interval. beta is chosen from data so that the data lies in
// Omega.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "refnet/activation.hpp"
#include "refnet/network.hpp"

namespace refnet {

enum class InsertVariant {
  kPre,   // new width B * n_0, scales the layer input
  kPost,  // new width B * n_1, scales the pre-activation
};

const char* ToString(InsertVariant variant);

struct GrowthReport {
  double beta = 1.0;
  std::string omega_desc;
  double max_abs_deviation = 0.0;
  std::vector<std::size_t> widths;  // of the grown network
};

// Splits neuron `neuron` of layers[layer]. The A copies take the
// original's position. Throws kNoFollowingLayer when `layer` is the last
// layer, kPositionOutOfRange for bad indices, kNotRefinable when the
// activation has no refinability data.
Network SplitNeuron(const Network& net, std::size_t layer, std::size_t neuron);

// Splits every neuron in `neurons` (a set; duplicates are ignored) in one
// pass. Width grows by |neurons| * (A - 1).
Network WidenLayer(const Network& net, std::size_t layer,
                   std::span<const std::size_t> neurons);
// All neurons: width becomes A * n.
Network WidenLayerAll(const Network& net, std::size_t layer);

// `position` is in [1, m_L]; the operator being split is layers[position-1]
// and its inputs are the data propagated through the layers before it.
// beta = delta / (2 sup |propagated component|); 1 if that sup is zero or
// delta is infinite. Throws kEmptyDataset, kPositionOutOfRange.
double ComputeBetaPre(const Network& net, std::size_t position,
                      std::span<const Vector> inputs, double delta);
// Same, with the sup taken over |W_i y + b_i| of the operator being split.
double ComputeBetaPost(const Network& net, std::size_t position,
                       std::span<const Vector> inputs, double delta);

struct Insertion {
  Network network;
  GrowthReport report;
};

// Inserts a layer with activation sigma0 before layers[position-1]'s
// activation. With an identity sigma0, beta = 1 and Omega is everything.
// The report's deviation is measured on the data inputs.
Insertion InsertLayer(const Network& net, std::size_t position,
                      const Activation& sigma0, int copies, InsertVariant variant,
                      const Dataset& data);

// Whether x lies in Omega for an insertion built with these parameters on
// the pre-insertion network `net`. Membership is strict: |value| < delta.
bool CheckDomain(const Network& net, std::size_t position, InsertVariant variant,
                 double beta, const IdentitySumData& sigma0_params,
                 std::span<const double> x);

struct DeviationStats {
  double max_abs = 0.0;
  double mean_abs = 0.0;  // over all output components of all inputs
};

// Compares forward passes of two networks with the same input dimension.
DeviationStats MeasureDeviation(const Network& a, const Network& b,
                                std::span<const Vector> inputs);

}  // namespace refnet
