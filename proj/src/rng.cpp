#include "qbgraph/rng.hpp"

#include <boost/random/beta_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace qbgraph {

double draw_normal(Rng& rng) {
  boost::random::normal_distribution<double> dist;
  return dist(rng);
}

double draw_uniform(Rng& rng) {
  boost::random::uniform_01<double> dist;
  return dist(rng);
}

double draw_beta(Rng& rng, double a, double b) {
  boost::random::beta_distribution<double> dist(a, b);
  return dist(rng);
}

Index draw_index(Rng& rng, Index n) {
  boost::random::uniform_int_distribution<Index> dist(0, n - 1);
  return dist(rng);
}

}  // namespace qbgraph
