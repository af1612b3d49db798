#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tweetnews/numerics/tensor.hpp"

namespace tweetnews::model {

/// Transformer dimensions. Defaults are desk scale; the published setup is
/// n_layers=6, n_heads=8, d_model=1024.
struct ModelConfig {
  std::size_t n_layers = 2;
  std::size_t n_heads = 2;
  std::size_t d_model = 64;
  std::size_t d_ff = 128;
  std::size_t max_len = 256;
  std::size_t vocab_size = 0;
  std::size_t n_styles = 2;
  double dropout_p = 0.0;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct NamedTensor {
  std::string name;
  numerics::Tensor tensor;
};

using ParameterList = std::vector<NamedTensor>;

std::vector<numerics::Tensor> tensors_of(const ParameterList& params);

}  // namespace tweetnews::model
