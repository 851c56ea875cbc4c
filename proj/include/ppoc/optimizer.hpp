#ifndef PPOC_OPTIMIZER_HPP_
#define PPOC_OPTIMIZER_HPP_

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ppoc/tensor.hpp"

namespace ppoc {

// Ordered collection of named parameters. Insertion order is the canonical
// order for serialization and optimizer sweeps; addresses stay stable so
// tapes can hold Param pointers.
class ParameterSet {
 public:
  Param& add(const std::string& name, Tensor init);
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  Param* find(const std::string& name);

  void zero_grad();
  size_t count() const { return items_.size(); }
  size_t scalar_count() const;

  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  long long step_count() const { return step_count_; }
  void set_step_count(long long t) { step_count_ = t; }

 private:
  friend void adam_step(ParameterSet&, double);
  std::vector<std::unique_ptr<Param>> items_;
  std::unordered_map<std::string, size_t> index_;
  long long step_count_ = 0;
};

// Adaptive-moment update, in place. Moments advance, gradients are left
// untouched (callers zero them). Constants follow the common PPO setup:
// beta1=0.9, beta2=0.999, eps=1e-5.
void adam_step(ParameterSet& params, double lr);

}  // namespace ppoc

#endif  // PPOC_OPTIMIZER_HPP_
