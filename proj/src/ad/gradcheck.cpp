#include "fsegan/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fsegan::ad {

std::string GradCheckResult::summary() const {
  std::ostringstream s;
  s << "checked " << checked << " entries, max relative error " << max_rel_error << " (tensor " << worst_tensor
    << " index " << worst_index << ": analytic " << worst_analytic << ", numeric " << worst_numeric << ")";
  if (refined > 0) s << ", " << refined << " entries refined";
  return s.str();
}

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

GradCheckResult check_gradients(const std::function<Tensor<double>()>& loss_fn, std::span<Tensor<double>> params,
                                double h, double floor, double retry_above, int refinements) {
  for (auto& p : params) p.zero_grad();
  auto loss = loss_fn();
  loss.backward();

  GradCheckResult result;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& p = params[t];
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    auto data = p.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      const auto central = [&](double step) {
        NoGradGuard guard;
        data[i] = saved + step;
        const double plus = loss_fn().item();
        data[i] = saved - step;
        const double minus = loss_fn().item();
        data[i] = saved;
        return (plus - minus) / (2.0 * step);
      };
      const double a = analytic.empty() ? 0.0 : analytic[i];
      double numeric = central(h);
      double err = relative_error(a, numeric, floor);
      if (refinements > 0 && err > retry_above) {
        ++result.refined;
        double scale = 1.0;
        for (int r = 0; r < refinements && err > retry_above; ++r) {
          scale *= 10.0;
          for (const double step : {h / scale, h * scale}) {
            const double n = central(step);
            const double e = relative_error(a, n, floor);
            if (e < err) {
              err = e;
              numeric = n;
            }
          }
        }
      }
      ++result.checked;
      if (err > result.max_rel_error || result.checked == 1) {
        result.max_rel_error = err;
        result.worst_tensor = t;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace fsegan::ad
