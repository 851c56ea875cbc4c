#include "ppoc/optimizer.hpp"

#include <cmath>

namespace ppoc {

Param& ParameterSet::add(const std::string& name, Tensor init) {
  if (index_.count(name)) throw ContractViolation("parameter already registered: " + name);
  index_[name] = items_.size();
  items_.push_back(std::make_unique<Param>(name, std::move(init)));
  return *items_.back();
}

Param& ParameterSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractViolation("no such parameter: " + name);
  return *items_[it->second];
}

const Param& ParameterSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractViolation("no such parameter: " + name);
  return *items_[it->second];
}

Param* ParameterSet::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : items_[it->second].get();
}

void ParameterSet::zero_grad() {
  for (auto& p : items_) p->zero_grad();
}

size_t ParameterSet::scalar_count() const {
  size_t n = 0;
  for (const auto& p : items_) n += p->value.size();
  return n;
}

void adam_step(ParameterSet& params, double lr) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-5;
  const long long t = ++params.step_count_;
  const double corr1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
  const double corr2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
  for (auto& p : params.items_) {
    for (size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i];
      p->m[i] = kBeta1 * p->m[i] + (1.0 - kBeta1) * g;
      p->v[i] = kBeta2 * p->v[i] + (1.0 - kBeta2) * g * g;
      const double mhat = p->m[i] / corr1;
      const double vhat = p->v[i] / corr2;
      p->value.values[i] -= lr * mhat / (std::sqrt(vhat) + kEps);
    }
  }
}

}  // namespace ppoc
