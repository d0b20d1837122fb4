#include "kagome/peps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "kagome/errors.hpp"
#include "kagome/linalg.hpp"

namespace kagome {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

int wrap(int x) { return ((x - 1) % kNumSites + kNumSites) % kNumSites + 1; }

std::string bond_name(int a, int b) {
  const Bond bond = make_bond(a, b);
  return "(" + std::to_string(bond.a) + "," + std::to_string(bond.b) + ")";
}

std::vector<Bond> virtual_bonds() {
  std::vector<Bond> out;
  for (int k = 1; k <= kNumSites; ++k) out.push_back(make_bond(k, wrap(k + 1)));
  for (int k = 2; k <= kNumSites; k += 2) out.push_back(make_bond(k, wrap(k + 2)));
  return out;
}

double uniform_pm1(std::mt19937_64& rng) {
  // 53 random bits, identical on every platform.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

void fill_random(PepsTensor& t, std::mt19937_64& rng) {
  for (Index n = 0; n < t.data.size(); ++n) {
    const double re = uniform_pm1(rng);
    const double im = uniform_pm1(rng);
    t.data(n) = {re, im};
  }
}

// Frontier crossing the cut between sites j and j+1: the ring bond (j, j+1)
// and the one chord passing over it.
struct Frontier {
  int ring = 1;
  int hex = 1;
  int dim() const { return ring * hex; }
};

Frontier frontier(const PepsState& s, int cut) {
  cut = wrap(cut);
  Frontier f;
  f.ring = s.at(cut).dims[kRingNext];
  f.hex = (cut % 2 == 0) ? s.at(cut).dims[kHexNext] : s.at(wrap(cut + 1)).dims[kHexPrev];
  return f;
}

void check_consistent(const PepsState& s, const char* which) {
  for (int k = 1; k <= kNumSites; ++k) {
    const PepsTensor& t = s.at(k);
    if (t.site != k) throw ContractionError(std::string(which) + ": tensor at slot " + std::to_string(k) + " is labelled " + std::to_string(t.site));
    if (static_cast<std::size_t>(t.data.size()) != t.size()) {
      throw ContractionError(std::string(which) + ": tensor at site " + std::to_string(k) + " has wrong entry count");
    }
    const int next = wrap(k + 1);
    if (t.dims[kRingNext] != s.at(next).dims[kRingPrev]) {
      throw ContractionError(std::string(which) + ": dimension mismatch on bond " + bond_name(k, next));
    }
    if (k % 2 == 0) {
      const int h = wrap(k + 2);
      if (t.dims[kHexNext] != s.at(h).dims[kHexPrev]) {
        throw ContractionError(std::string(which) + ": dimension mismatch on bond " + bond_name(k, h));
      }
    } else if (t.dims[kHexPrev] != 1 || t.dims[kHexNext] != 1) {
      throw ContractionError(std::string(which) + ": outer site " + std::to_string(k) + " carries chord legs");
    }
  }
}

void check_pair(const PepsState& bra, const PepsState& ket) {
  check_consistent(bra, "bra");
  check_consistent(ket, "ket");
  for (int k = 1; k <= kNumSites; ++k) {
    const auto& a = bra.at(k).dims;
    const auto& b = ket.at(k).dims;
    if (a[kPhys] != b[kPhys]) throw ContractionError("bra/ket physical dimension differs at site " + std::to_string(k));
    if (a[kRingNext] != b[kRingNext]) throw ContractionError("bra/ket dimension differs on bond " + bond_name(k, wrap(k + 1)));
    if (a[kHexNext] != b[kHexNext]) throw ContractionError("bra/ket dimension differs on bond " + bond_name(k, wrap(k + 2)));
  }
}

// Site tensor as a chain matrix m[f_prev, i + d * f_next]. Outer sites keep
// only their ring legs; the chord over them acts as `blocks` identical copies.
struct SiteMatrix {
  MatrixXcd m;
  int d = 1;
  int rows = 1;
  int cols = 1;
  int blocks = 1;
};

SiteMatrix site_matrix(const PepsState& s, int k) {
  const PepsTensor& t = s.at(k);
  const auto& dm = t.dims;
  SiteMatrix sm;
  sm.d = dm[kPhys];
  const int rp = dm[kRingPrev];
  const int rn = dm[kRingNext];
  if (k % 2 == 0) {
    const int hp = dm[kHexPrev];
    const int hn = dm[kHexNext];
    sm.rows = rp * hp;
    sm.cols = rn * hn;
    sm.m.resize(sm.rows, sm.d * sm.cols);
    for (int b = 0; b < hn; ++b)
      for (int a = 0; a < hp; ++a)
        for (int n = 0; n < rn; ++n)
          for (int p = 0; p < rp; ++p)
            for (int i = 0; i < sm.d; ++i) sm.m(p + rp * a, i + sm.d * (n + rn * b)) = t(i, p, n, a, b);
  } else {
    sm.rows = rp;
    sm.cols = rn;
    sm.blocks = frontier(s, k).hex;
    sm.m.resize(rp, sm.d * rn);
    for (int n = 0; n < rn; ++n)
      for (int p = 0; p < rp; ++p)
        for (int i = 0; i < sm.d; ++i) sm.m(p, i + sm.d * n) = t(i, p, n, 0, 0);
  }
  return sm;
}

// Dense chain matrix with the chord copies expanded.
MatrixXcd dense_chain_matrix(const SiteMatrix& sm) {
  if (sm.blocks == 1) return sm.m;
  const int d = sm.d;
  MatrixXcd out = MatrixXcd::Zero(sm.rows * sm.blocks, d * sm.cols * sm.blocks);
  for (int b = 0; b < sm.blocks; ++b) out.block(sm.rows * b, d * sm.cols * b, sm.rows, d * sm.cols) = sm.m;
  return out;
}

// Transfer objects X[a, f + chi_f * f'] where a = (s, s') indexes the start
// cut (ket, bra) and (f, f') the current cut (ket, bra).

// K[a, i + d * (g + chi_g * f')] = sum_f X[a, f, f'] C[f, i, g]
MatrixXcd ket_step(const MatrixXcd& x, int chi_f, const SiteMatrix& sm) {
  const int d = sm.d;
  const int chi_g = sm.cols * sm.blocks;
  const Index rows = x.rows();
  MatrixXcd k(rows, static_cast<Index>(d) * chi_g * chi_f);
  for (int fp = 0; fp < chi_f; ++fp) {
    for (int b = 0; b < sm.blocks; ++b) {
      k.middleCols(static_cast<Index>(d) * sm.cols * b + static_cast<Index>(d) * chi_g * fp, d * sm.cols).noalias() =
          x.middleCols(static_cast<Index>(sm.rows) * b + static_cast<Index>(chi_f) * fp, sm.rows) * sm.m;
    }
  }
  return k;
}

// kp[a + S * g, i' + d * f'] += coef * op[i', i] * K[a, i + d * (g + chi_g * f')]
void accumulate(MatrixXcd& kp, const MatrixXcd& k, Index s, int d, int chi_g, int chi_f, const MatrixXcd& op,
                std::complex<double> coef) {
  for (int fp = 0; fp < chi_f; ++fp) {
    for (int ip = 0; ip < d; ++ip) {
      for (int i = 0; i < d; ++i) {
        const std::complex<double> c = coef * op(ip, i);
        if (c == 0.0) continue;
        auto dst = kp.col(ip + static_cast<Index>(d) * fp);
        for (int g = 0; g < chi_g; ++g) {
          dst.segment(s * g, s) += c * k.col(i + static_cast<Index>(d) * (g + static_cast<Index>(chi_g) * fp));
        }
      }
    }
  }
}

// X'[a, g + chi_g * g'] = sum_{f', i'} kp[a + S g, i' + d f'] conj(C[f', i', g'])
MatrixXcd bra_step(const MatrixXcd& kp, Index s, const SiteMatrix& sm) {
  const int d = sm.d;
  const int chi_g = sm.cols * sm.blocks;
  MatrixXcd mbar(static_cast<Index>(d) * sm.rows, sm.cols);
  for (int c = 0; c < sm.cols; ++c)
    for (int r = 0; r < sm.rows; ++r)
      for (int i = 0; i < d; ++i) mbar(i + d * r, c) = std::conj(sm.m(r, i + d * c));
  MatrixXcd out(s, static_cast<Index>(chi_g) * chi_g);
  Eigen::Map<MatrixXcd> y(out.data(), s * chi_g, chi_g);
  for (int b = 0; b < sm.blocks; ++b) {
    y.middleCols(static_cast<Index>(sm.cols) * b, sm.cols).noalias() =
        kp.middleCols(static_cast<Index>(d) * sm.rows * b, static_cast<Index>(d) * sm.rows) * mbar;
  }
  return out;
}

// Tensor as a matrix with `leg` as the column index; rows run over the other
// indices in storage order.
MatrixXcd leg_matrix(const PepsTensor& t, int leg) {
  const Index dl = t.dims[leg];
  const Index rows = static_cast<Index>(t.size()) / dl;
  Index inner = 1;
  for (int l = 0; l < leg; ++l) inner *= t.dims[l];
  MatrixXcd m(rows, dl);
  for (Index n = 0; n < static_cast<Index>(t.size()); ++n) {
    const Index lo = n % inner;
    const Index x = (n / inner) % dl;
    const Index hi = n / (inner * dl);
    m(lo + inner * hi, x) = t.data(n);
  }
  return m;
}

void set_from_leg_matrix(PepsTensor& t, int leg, const MatrixXcd& m) {
  const Index dl = t.dims[leg];
  Index inner = 1;
  for (int l = 0; l < leg; ++l) inner *= t.dims[l];
  for (Index n = 0; n < static_cast<Index>(t.size()); ++n) {
    const Index lo = n % inner;
    const Index x = (n / inner) % dl;
    const Index hi = n / (inner * dl);
    t.data(n) = m(lo + inner * hi, x);
  }
}

// Moves both tensors on a bond into the symmetric two-site gauge
// A_a -> Q_a U sqrt(S), A_b -> sqrt(S) V^dag Q_b. The state is unchanged.
void balance_bond(PepsTensor& ta, int leg_a, PepsTensor& tb, int leg_b) {
  const MatrixXcd ma = leg_matrix(ta, leg_a);
  const MatrixXcd mb = leg_matrix(tb, leg_b);
  const Index dl = ma.cols();
  if (ma.rows() < dl || mb.rows() < dl) return;
  Eigen::HouseholderQR<MatrixXcd> qa(ma);
  Eigen::HouseholderQR<MatrixXcd> qb(mb);
  const MatrixXcd ra = qa.matrixQR().topRows(dl).triangularView<Eigen::Upper>();
  const MatrixXcd rb = qb.matrixQR().topRows(dl).triangularView<Eigen::Upper>();
  const MatrixXcd qa_thin = qa.householderQ() * MatrixXcd::Identity(ma.rows(), dl);
  const MatrixXcd qb_thin = qb.householderQ() * MatrixXcd::Identity(mb.rows(), dl);
  // Bond matrix: sum_x ma[., x] mb[., x] = qa (ra rb^T) qb^T.
  Eigen::JacobiSVD<MatrixXcd> svd(ra * rb.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd root = svd.singularValues().cwiseSqrt();
  set_from_leg_matrix(ta, leg_a, qa_thin * svd.matrixU() * root.asDiagonal());
  set_from_leg_matrix(tb, leg_b, qb_thin * svd.matrixV().conjugate() * root.asDiagonal());
}

struct StepTerm {
  int source;
  int target;
  const MatrixXcd* op;
  std::complex<double> coef;
};

using Channels = std::map<int, MatrixXcd>;

// Absorbs one site into every channel. Each term moves a source channel into
// a target channel with a single-site operator on the physical leg.
Channels absorb(const Channels& in, int chi_f, const SiteMatrix& ket, const SiteMatrix& bra,
                const std::vector<StepTerm>& terms) {
  if (ket.rows * ket.blocks != chi_f) throw ContractionError("frontier dimension mismatch during contraction");
  const int d = ket.d;
  const int chi_g = ket.cols * ket.blocks;
  std::map<int, MatrixXcd> kets;
  std::map<int, MatrixXcd> targets;
  Index s = 0;
  for (const StepTerm& t : terms) {
    auto src = in.find(t.source);
    if (src == in.end()) continue;
    s = src->second.rows();
    auto it = kets.find(t.source);
    if (it == kets.end()) it = kets.emplace(t.source, ket_step(src->second, chi_f, ket)).first;
    auto tg = targets.find(t.target);
    if (tg == targets.end()) {
      tg = targets.emplace(t.target, MatrixXcd::Zero(s * chi_g, static_cast<Index>(d) * chi_f)).first;
    }
    accumulate(tg->second, it->second, s, d, chi_g, chi_f, *t.op, t.coef);
  }
  Channels out;
  for (auto& [key, kp] : targets) out.emplace(key, bra_step(kp, s, bra));
  return out;
}

MatrixXcd hermitize(const MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

MatrixXcd kron_env(const MatrixXcd& env, const MatrixXcd& op) {
  const Index v = env.rows();
  const Index d = op.rows();
  MatrixXcd out(v * d, v * d);
  for (Index b = 0; b < v; ++b)
    for (Index a = 0; a < v; ++a)
      for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i) out(i + d * a, j + d * b) = env(a, b) * op(i, j);
  return out;
}

// Site matrix read from the next cut back to the previous one, for blocks
// grown against the ring direction.
SiteMatrix reversed_site_matrix(const PepsState& s, int k) {
  const PepsTensor& t = s.at(k);
  const auto& dm = t.dims;
  SiteMatrix sm;
  sm.d = dm[kPhys];
  const int rp = dm[kRingPrev];
  const int rn = dm[kRingNext];
  if (k % 2 == 0) {
    const int hp = dm[kHexPrev];
    const int hn = dm[kHexNext];
    sm.rows = rn * hn;
    sm.cols = rp * hp;
    sm.m.resize(sm.rows, sm.d * sm.cols);
    for (int b = 0; b < hn; ++b)
      for (int a = 0; a < hp; ++a)
        for (int n = 0; n < rn; ++n)
          for (int p = 0; p < rp; ++p)
            for (int i = 0; i < sm.d; ++i) sm.m(n + rn * b, i + sm.d * (p + rp * a)) = t(i, p, n, a, b);
  } else {
    sm.rows = rn;
    sm.cols = rp;
    sm.blocks = frontier(s, k).hex;
    sm.m.resize(rn, sm.d * rp);
    for (int n = 0; n < rn; ++n)
      for (int p = 0; p < rp; ++p)
        for (int i = 0; i < sm.d; ++i) sm.m(n, i + sm.d * p) = t(i, p, n, 0, 0);
  }
  return sm;
}

// Environment of site k from a block of sites k+1..12 (r) and one of sites
// 1..k-1 (l), both open on cut 0: env[v', v] over the flattened virtual legs.
MatrixXcd pair_env(const MatrixXcd& r, const MatrixXcd& l, const PepsState& s, int k) {
  const auto& dm = s.at(k).dims;
  const int rp = dm[kRingPrev];
  const int rn = dm[kRingNext];
  const Index chi_k = frontier(s, k).dim();
  const Index chi_p = frontier(s, k - 1).dim();
  if (k % 2 == 0) {
    const MatrixXcd x = r.transpose() * l;
    const int hp = dm[kHexPrev];
    const int hn = dm[kHexNext];
    const Index v = static_cast<Index>(rp) * rn * hp * hn;
    MatrixXcd env(v, v);
    auto flat = [&](int p, int n, int a, int b) -> Index { return p + rp * (n + rn * (a + static_cast<Index>(hp) * b)); };
    for (int b2 = 0; b2 < hn; ++b2)
      for (int a2 = 0; a2 < hp; ++a2)
        for (int n2 = 0; n2 < rn; ++n2)
          for (int p2 = 0; p2 < rp; ++p2) {
            const Index vb = flat(p2, n2, a2, b2);
            const Index sb = n2 + rn * b2;
            const Index fb = p2 + rp * a2;
            for (int b = 0; b < hn; ++b)
              for (int a = 0; a < hp; ++a)
                for (int n = 0; n < rn; ++n)
                  for (int p = 0; p < rp; ++p) {
                    const Index sk = n + rn * b;
                    const Index fk = p + rp * a;
                    env(vb, flat(p, n, a, b)) = x(sk + chi_k * sb, fk + chi_p * fb);
                  }
          }
    return env;
  }
  // Outer site: the chord passes over k, so only entries diagonal in it are needed.
  const int h = frontier(s, k).hex;
  const Index rows = r.rows();
  MatrixXcd rs(rows, static_cast<Index>(rn) * rn);
  MatrixXcd ls(rows, static_cast<Index>(rp) * rp);
  MatrixXcd env = MatrixXcd::Zero(static_cast<Index>(rp) * rn, static_cast<Index>(rp) * rn);
  for (int h2 = 0; h2 < h; ++h2)
    for (int h1 = 0; h1 < h; ++h1) {
      for (int n2 = 0; n2 < rn; ++n2)
        for (int n = 0; n < rn; ++n) rs.col(n + rn * n2) = r.col((n + rn * h1) + chi_k * (n2 + rn * h2));
      for (int p2 = 0; p2 < rp; ++p2)
        for (int p = 0; p < rp; ++p) ls.col(p + rp * p2) = l.col((p + rp * h1) + chi_p * (p2 + rp * h2));
      const MatrixXcd m = rs.transpose() * ls;
      for (int n2 = 0; n2 < rn; ++n2)
        for (int p2 = 0; p2 < rp; ++p2)
          for (int n = 0; n < rn; ++n)
            for (int p = 0; p < rp; ++p) env(p2 + rp * n2, p + rp * n) += m(n + rn * n2, p + rp * p2);
    }
  return env;
}

struct Environments {
  MatrixXcd norm;
  MatrixXcd number_sum;
  MatrixXcd done;
  /// Pairs with a_k.
  MatrixXcd hop;
  /// Pairs with a_k^dag.
  MatrixXcd hop_dag;
};

constexpr int kChanIdentity = 0;
constexpr int kChanNumber = 1;
constexpr int kChanDone = 2;
// Left blocks: sum of -kappa a_u^dag over absorbed u bonded to the key site.
constexpr int kChanPending = 100;
// Right blocks: a_v at an absorbed site v that still has unabsorbed partners.
constexpr int kChanLowered = 200;

struct Reduced {
  double onsite = 0.0;
  double lambda = 0.0;
  double target = 0.0;
  std::map<Bond, double> kappa;
  MatrixXcd id, num, up, down, local, half_pair;

  double coupling(int a, int b) const {
    auto it = kappa.find(make_bond(a, b));
    return it == kappa.end() ? 0.0 : it->second;
  }
  // Partners of j joined by a nonzero coupling.
  std::vector<int> partners(int j) const {
    std::vector<int> out;
    for (const auto& [bond, k] : kappa) {
      if (k == 0.0) continue;
      if (bond.a == j) out.push_back(bond.b);
      if (bond.b == j) out.push_back(bond.a);
    }
    return out;
  }
};

Reduced reduce(const PepsState& state, const HamiltonianParams& params) {
  Reduced r;
  const double unit = params.energy_unit();
  r.onsite = params.onsite_energy() / unit;
  r.lambda = number_penalty_weight(state.config, params);
  r.target = state.config.n_total;
  for (const Bond& b : state.topology.bonds()) r.kappa[b] = params.coupling(b.a, b.b) / unit;
  const int d = state.at(1).dims[kPhys];
  r.id = MatrixXcd::Identity(d, d);
  r.num = number_operator(d);
  r.up = creation(d);
  r.down = annihilation(d);
  // Hermitian on-site pieces enter with half weight; done + done^dag restores them.
  r.local = 0.5 * ((r.onsite - 2.0 * r.lambda * r.target) * r.num + r.lambda * r.num * r.num);
  r.half_pair = r.lambda * r.num;
  return r;
}

Channels start_block(const PepsState& state) {
  const Index chi0 = frontier(state, 0).dim();
  Channels ch;
  ch.emplace(kChanIdentity, MatrixXcd::Identity(chi0 * chi0, chi0 * chi0));
  return ch;
}

void add_common_terms(const Reduced& r, std::vector<StepTerm>& terms) {
  terms.push_back({kChanIdentity, kChanIdentity, &r.id, 1.0});
  terms.push_back({kChanIdentity, kChanDone, &r.local, 1.0});
  terms.push_back({kChanDone, kChanDone, &r.id, 1.0});
  if (r.lambda != 0.0) {
    terms.push_back({kChanIdentity, kChanNumber, &r.num, 1.0});
    terms.push_back({kChanNumber, kChanNumber, &r.id, 1.0});
    terms.push_back({kChanNumber, kChanDone, &r.half_pair, 1.0});
  }
}

// Block of sites 1..j from the block of sites 1..j-1.
Channels grow_left(const PepsState& state, const Reduced& r, const Channels& in, int j) {
  std::vector<StepTerm> terms;
  add_common_terms(r, terms);
  for (const auto& [key, x] : in) {
    if (key < kChanPending) continue;
    terms.push_back({key, key == kChanPending + j ? kChanDone : key, key == kChanPending + j ? &r.down : &r.id, 1.0});
  }
  for (int v : r.partners(j)) {
    if (v > j) terms.push_back({kChanIdentity, kChanPending + v, &r.up, -r.coupling(j, v)});
  }
  const SiteMatrix sm = site_matrix(state, j);
  return absorb(in, frontier(state, j - 1).dim(), sm, sm, terms);
}

// Block of sites j..12 from the block of sites j+1..12.
Channels grow_right(const PepsState& state, const Reduced& r, const Channels& in, int j) {
  std::vector<StepTerm> terms;
  add_common_terms(r, terms);
  std::vector<MatrixXcd> scaled;
  scaled.reserve(in.size());
  for (const auto& [key, x] : in) {
    if (key < kChanLowered) continue;
    const int v = key - kChanLowered;
    const double kappa = r.coupling(v, j);
    if (kappa != 0.0) terms.push_back({key, kChanDone, &r.up, -kappa});
    bool open = false;
    for (int w : r.partners(v)) open = open || w < j;
    if (open) terms.push_back({key, key, &r.id, 1.0});
  }
  bool open = false;
  for (int w : r.partners(j)) open = open || w < j;
  if (open) terms.push_back({kChanIdentity, kChanLowered + j, &r.down, 1.0});
  const SiteMatrix sm = reversed_site_matrix(state, j);
  return absorb(in, frontier(state, j).dim(), sm, sm, terms);
}

Environments combine(const PepsState& state, const Reduced& r, const Channels& left, const Channels& right, int k) {
  const Index v = static_cast<Index>(state.at(k).size() / state.at(k).dims[kPhys]);
  auto get = [](const Channels& ch, int key) -> const MatrixXcd* {
    auto it = ch.find(key);
    return it == ch.end() ? nullptr : &it->second;
  };
  auto term = [&](MatrixXcd& acc, const MatrixXcd* rm, const MatrixXcd* lm, std::complex<double> c) {
    if (!rm || !lm || c == 0.0) return;
    acc += c * pair_env(*rm, *lm, state, k);
  };
  const MatrixXcd* li = get(left, kChanIdentity);
  const MatrixXcd* ri = get(right, kChanIdentity);
  if (!li || !ri) throw ContractionError("missing identity channel");
  Environments env;
  env.norm = pair_env(*ri, *li, state, k);
  env.number_sum = MatrixXcd::Zero(v, v);
  env.done = MatrixXcd::Zero(v, v);
  env.hop = MatrixXcd::Zero(v, v);
  env.hop_dag = MatrixXcd::Zero(v, v);
  term(env.number_sum, ri, get(left, kChanNumber), 1.0);
  term(env.number_sum, get(right, kChanNumber), li, 1.0);
  term(env.done, ri, get(left, kChanDone), 1.0);
  term(env.done, get(right, kChanDone), li, 1.0);
  term(env.done, get(right, kChanNumber), get(left, kChanNumber), r.lambda);
  term(env.hop, ri, get(left, kChanPending + k), 1.0);
  for (const auto& [key, x] : right) {
    if (key < kChanLowered) continue;
    const int site = key - kChanLowered;
    term(env.done, &x, get(left, kChanPending + site), 1.0);
    term(env.hop_dag, &x, li, -r.coupling(site, k));
  }
  for (const auto& [key, x] : left) {
    if (key >= kChanPending && key - kChanPending != k && key - kChanPending < k) {
      throw ContractionError("unterminated hopping channel");
    }
  }
  return env;
}

LocalEigProblem assemble(const PepsState& state, const Reduced& r, const Environments& env, int k) {
  const MatrixXcd norm = hermitize(env.norm);
  const MatrixXcd done = env.done + env.done.adjoint() + r.lambda * r.target * r.target * norm;
  const MatrixXcd onsite = (r.onsite - 2.0 * r.lambda * r.target) * norm + 2.0 * r.lambda * env.number_sum;
  MatrixXcd h = kron_env(done, r.id) + kron_env(onsite, r.num) + kron_env(r.lambda * norm, r.num * r.num);
  const MatrixXcd hop = kron_env(env.hop, r.down) + kron_env(env.hop_dag, r.up);
  h += hop + hop.adjoint();

  LocalEigProblem p;
  p.site = k;
  p.phys_dim = state.at(k).dims[kPhys];
  p.h_eff = hermitize(h);
  p.n_eff = kron_env(norm, r.id);
  p.norm_env = norm;
  return p;
}

std::mt19937_64 reinit_rng(std::uint64_t seed, int sweep, int site) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sweep), static_cast<std::uint32_t>(site), 0x5eedu};
  return std::mt19937_64(seq);
}

}  // namespace

PepsConfig PepsConfig::for_photons(int n_total, const KagomeTopology& topology, std::optional<int> bond_cap,
                                   std::uint64_t seed) {
  if (n_total < 0) throw ConfigError("photon number must be >= 0");
  PepsConfig c;
  c.n_total = n_total;
  c.phys_dim = n_total + 1;
  c.bond_cap = bond_cap.value_or(c.phys_dim * c.phys_dim);
  c.seed = seed;
  for (int k = 1; k <= kNumSites; ++k) c.bond_dims[make_bond(k, wrap(k + 1))] = std::min(c.phys_dim, c.bond_cap);
  for (int k = 2; k <= kNumSites; k += 2) c.bond_dims[make_bond(k, wrap(k + 2))] = c.bond_cap;
  c.validate(topology);
  return c;
}

int PepsConfig::bond_dim(int a, int b) const {
  auto it = bond_dims.find(make_bond(a, b));
  if (it == bond_dims.end()) throw ConfigError("no bond dimension for " + bond_name(a, b));
  return it->second;
}

void PepsConfig::validate(const KagomeTopology& topology) const {
  if (topology.num_sites() != kNumSites) throw ConfigError("PEPS requires the 12-site cell");
  if (n_total < 0) throw ConfigError("n_total must be >= 0");
  if (phys_dim != n_total + 1) throw ConfigError("phys_dim must equal n_total + 1");
  if (bond_cap < 1 || bond_cap > phys_dim * phys_dim) throw ConfigError("bond_cap must lie in 1..d^2");
  for (const Bond& b : virtual_bonds()) {
    const int dim = bond_dim(b.a, b.b);
    if (dim < 1) throw ConfigError("bond dimension on " + bond_name(b.a, b.b) + " must be >= 1");
    if (dim > bond_cap) throw ConfigError("bond dimension on " + bond_name(b.a, b.b) + " exceeds bond_cap");
  }
  if (!(convergence_tol > 0.0)) throw ConfigError("convergence_tol must be > 0");
  if (!(regularization_eps > 0.0)) throw ConfigError("regularization_eps must be > 0");
  if (max_sweeps < 1) throw ConfigError("max_sweeps must be >= 1");
  if (number_penalty && !(*number_penalty >= 0.0)) throw ConfigError("number_penalty must be >= 0");
}

std::size_t PepsTensor::size() const {
  std::size_t n = 1;
  for (int x : dims) n *= static_cast<std::size_t>(x);
  return n;
}

Eigen::Index PepsTensor::index(int i, int rp, int rn, int hp, int hn) const {
  return i + dims[0] * (rp + static_cast<Index>(dims[1]) * (rn + static_cast<Index>(dims[2]) * (hp + static_cast<Index>(dims[3]) * hn)));
}

std::array<int, 5> tensor_dims(const PepsConfig& config, int k) {
  std::array<int, 5> dims{};
  dims[kPhys] = config.phys_dim;
  dims[kRingPrev] = config.bond_dim(wrap(k - 1), k);
  dims[kRingNext] = config.bond_dim(k, wrap(k + 1));
  const bool inner = k % 2 == 0;
  dims[kHexPrev] = inner ? config.bond_dim(wrap(k - 2), k) : 1;
  dims[kHexNext] = inner ? config.bond_dim(k, wrap(k + 2)) : 1;
  return dims;
}

PepsState init_random(const PepsConfig& config, const KagomeTopology& topology) {
  config.validate(topology);
  PepsState state{topology, config, {}, config.seed};
  for (int k = 1; k <= kNumSites; ++k) {
    PepsTensor& t = state.at(k);
    t.site = k;
    t.dims = tensor_dims(config, k);
    t.data.resize(static_cast<Index>(t.size()));
  }
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::mt19937_64 rng(state.seed_used);
    for (PepsTensor& t : state.tensors) fill_random(t, rng);
    const double norm = contract_scalar(state, state).real();
    if (norm > 0.0 && std::isfinite(norm)) return state;
    ++state.seed_used;
  }
  throw NumericalError("random initialization kept producing a zero-norm state");
}

PepsState product_state(const Occupation& occ, int phys_dim, const KagomeTopology& topology) {
  PepsConfig c;
  c.phys_dim = phys_dim;
  c.n_total = phys_dim - 1;
  c.bond_cap = 1;
  for (const Bond& b : virtual_bonds()) c.bond_dims[b] = 1;
  c.validate(topology);
  PepsState state{topology, c, {}, c.seed};
  for (int k = 1; k <= kNumSites; ++k) {
    if (occ[k - 1] >= phys_dim) throw ArgumentError("occupation exceeds the physical dimension at site " + std::to_string(k));
    PepsTensor& t = state.at(k);
    t.site = k;
    t.dims = tensor_dims(c, k);
    t.data = VectorXcd::Zero(phys_dim);
    t.data(occ[k - 1]) = 1.0;
  }
  return state;
}

Eigen::MatrixXcd annihilation(int d) {
  MatrixXcd a = MatrixXcd::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Eigen::MatrixXcd creation(int d) { return annihilation(d).adjoint(); }

Eigen::MatrixXcd number_operator(int d) {
  MatrixXcd n = MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i) n(i, i) = i;
  return n;
}

std::complex<double> contract_scalar(const PepsState& bra, const PepsState& ket, const Insertions& insertions) {
  check_pair(bra, ket);
  const int d = ket.at(1).dims[kPhys];
  for (const auto& [site, op] : insertions) {
    if (!valid_site(site)) throw ArgumentError("insertion at invalid site " + std::to_string(site));
    if (op.rows() != d || op.cols() != d) throw ContractionError("insertion at site " + std::to_string(site) + " is not d x d");
  }
  const MatrixXcd id = MatrixXcd::Identity(d, d);
  const Index chi = frontier(ket, kNumSites).dim();
  Channels ch;
  ch.emplace(0, MatrixXcd::Identity(chi * chi, chi * chi));
  for (int k = 1; k <= kNumSites; ++k) {
    auto it = insertions.find(k);
    const MatrixXcd* op = it == insertions.end() ? &id : &it->second;
    ch = absorb(ch, frontier(ket, k - 1).dim(), site_matrix(ket, k), site_matrix(bra, k), {{0, 0, op, 1.0}});
  }
  return ch.at(0).trace();
}

Eigen::VectorXcd peps_to_statevector(const PepsState& state) {
  check_consistent(state, "state");
  const int d = state.at(1).dims[kPhys];
  if (d > 3) throw CapacityError("state-vector expansion limited to d <= 3 (got d=" + std::to_string(d) + ")");

  // Rows (start frontier, i_first, ..., i_last), columns the end frontier.
  auto half = [&](int first) {
    const Index chi0 = frontier(state, first - 1).dim();
    MatrixXcd t = MatrixXcd::Identity(chi0, chi0);
    for (int j = first; j < first + 6; ++j) {
      const MatrixXcd c = dense_chain_matrix(site_matrix(state, j));
      MatrixXcd next = t * c;
      const Index chi = frontier(state, j).dim();
      t = Eigen::Map<MatrixXcd>(next.data(), next.rows() * d, chi);
    }
    return t;
  };
  const MatrixXcd left = half(1);
  const MatrixXcd right = half(7);
  const Index chi12 = frontier(state, 12).dim();
  const Index chi6 = frontier(state, 6).dim();
  const Index n6 = left.rows() / chi12;

  MatrixXcd l(n6, chi6 * chi12);
  for (Index fs = 0; fs < chi12; ++fs)
    for (Index f6 = 0; f6 < chi6; ++f6)
      for (Index i = 0; i < n6; ++i) l(i, f6 + chi6 * fs) = left(fs + chi12 * i, f6);
  MatrixXcd r(chi6 * chi12, n6);
  for (Index j = 0; j < n6; ++j)
    for (Index fs = 0; fs < chi12; ++fs)
      for (Index f6 = 0; f6 < chi6; ++f6) r(f6 + chi6 * fs, j) = right(f6 + chi6 * j, fs);
  MatrixXcd psi = l * r;
  return Eigen::Map<VectorXcd>(psi.data(), psi.size());
}

Eigen::VectorXcd project_to_sector(const Eigen::VectorXcd& full, int phys_dim, const FockBasis& basis) {
  VectorXcd out(static_cast<Index>(basis.dimension()));
  for (std::size_t n = 0; n < basis.dimension(); ++n) {
    const Occupation& occ = basis.state(n);
    Index idx = 0;
    Index stride = 1;
    for (int k = 0; k < kNumSites; ++k) {
      if (occ[k] >= phys_dim) throw ArgumentError("sector exceeds the physical dimension");
      idx += occ[k] * stride;
      stride *= phys_dim;
    }
    if (idx >= full.size()) throw ArgumentError("state vector too short for the sector");
    out(static_cast<Index>(n)) = full(idx);
  }
  return out;
}

double number_penalty_weight(const PepsConfig& config, const HamiltonianParams& params) {
  if (config.number_penalty) return *config.number_penalty;
  // Sector energies are N e0 with e0 the single-photon ground energy, so any
  // weight above |e0| makes the target sector the penalized minimum.
  const double unit = params.energy_unit();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(kNumSites, kNumSites);
  for (const auto& [bond, kappa] : params.couplings) k(bond.a - 1, bond.b - 1) = k(bond.b - 1, bond.a - 1) = kappa / unit;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  const double e0 = params.onsite_energy() / unit - es.eigenvalues().maxCoeff();
  const double weight = 2.0 * std::abs(e0);
  return weight > 0.0 ? weight : 1.0;
}

LocalEigProblem build_effective_pair(const PepsState& state, const HamiltonianParams& params, int k) {
  if (!valid_site(k)) throw ArgumentError("site " + std::to_string(k) + " outside 1..12");
  check_consistent(state, "state");
  params.validate(state.topology);
  const Reduced r = reduce(state, params);
  Channels left = start_block(state);
  for (int j = 1; j < k; ++j) left = grow_left(state, r, left, j);
  Channels right = start_block(state);
  for (int j = kNumSites; j > k; --j) right = grow_right(state, r, right, j);
  return assemble(state, r, combine(state, r, left, right, k), k);
}

void balance_bonds(PepsState& state);

GevpSolution solve_local_gevp(const LocalEigProblem& problem, double eps, const Eigen::VectorXcd* warm_start) {
  if (!(eps > 0.0)) throw ArgumentError("regularization eps must be > 0");
  const MatrixXcd& h = problem.h_eff;
  const Index n = h.rows();
  if (h.cols() != n || problem.n_eff.rows() != n || problem.n_eff.cols() != n) {
    throw ArgumentError("H_eff and N_eff must be square of equal size");
  }
  const bool factored = problem.norm_env.has_value();
  const Index rep = factored ? problem.phys_dim : 1;
  const MatrixXcd& nm = factored ? *problem.norm_env : problem.n_eff;
  const Index v = nm.rows();
  if (v * rep != n) throw ArgumentError("normalization factor does not match H_eff");

  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitize(nm));
  if (es.info() != Eigen::Success) throw NumericalError("normalization eigensolve failed at site " + std::to_string(problem.site));
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double lmax = lam.maxCoeff();
  if (!(lmax > 0.0) || !std::isfinite(lmax)) {
    throw SingularEnvironmentError("effective normalization vanishes at site " + std::to_string(problem.site));
  }
  std::vector<Index> keep;
  for (Index i = 0; i < lam.size(); ++i)
    if (lam(i) > eps * lmax) keep.push_back(i);
  const Index kept = static_cast<Index>(keep.size());
  MatrixXcd u(v, kept);
  Eigen::VectorXd scale(kept);
  for (Index c = 0; c < kept; ++c) {
    u.col(c) = es.eigenvectors().col(keep[c]);
    scale(c) = lam(keep[c]);
  }
  // Whitening map W = U diag(lambda^-1/2), applied as W (x) I_rep.
  const MatrixXcd w = u * scale.cwiseSqrt().cwiseInverse().asDiagonal();

  GevpSolution sol;
  sol.regularized = kept < v;
  sol.condition = scale.maxCoeff() / scale.minCoeff();

  // Part of the current vector in the dropped subspace. It is kept as one
  // extra search direction so that the current vector stays reachable.
  VectorXcd extra;
  VectorXcd start_kept;
  double extra_weight = 0.0;
  if (warm_start && warm_start->size() == n) {
    Eigen::Map<const MatrixXcd> am(warm_start->data(), rep, v);
    const MatrixXcd coeff = am * u.conjugate();
    MatrixXcd xs = coeff * scale.cwiseSqrt().asDiagonal();
    start_kept = Eigen::Map<VectorXcd>(xs.data(), xs.size());
    if (sol.regularized) {
      MatrixXcd rest = am - coeff * u.transpose();
      extra = Eigen::Map<VectorXcd>(rest.data(), rest.size());
      const double nb = extra.dot(problem.n_eff * extra).real();
      if (nb > 0.0 && std::isfinite(nb) && extra.norm() > 0.0) {
        extra_weight = std::sqrt(nb);
        extra /= extra_weight;
      } else {
        extra.resize(0);
      }
    }
  }
  const Index m0 = kept * rep;
  const Index m = m0 + (extra.size() > 0 ? 1 : 0);
  sol.kept = static_cast<int>(m0);

  auto expand = [&](const VectorXcd& x) -> VectorXcd {
    Eigen::Map<const MatrixXcd> xm(x.data(), rep, kept);
    MatrixXcd y = xm * w.transpose();
    VectorXcd out = Eigen::Map<VectorXcd>(y.data(), y.size());
    if (m > m0) out += x(m0) * extra;
    return out;
  };
  auto contract = [&](const VectorXcd& y) -> VectorXcd {
    Eigen::Map<const MatrixXcd> ym(y.data(), rep, v);
    MatrixXcd x = ym * w.conjugate();
    VectorXcd out(m);
    out.head(m0) = Eigen::Map<VectorXcd>(x.data(), x.size());
    if (m > m0) out(m0) = extra.dot(y);
    return out;
  };

  VectorXcd x;
  if (m <= 400) {
    MatrixXcd t(n, m);
    for (Index c = 0; c < m; ++c) {
      VectorXcd e = VectorXcd::Zero(m);
      e(c) = 1.0;
      t.col(c) = expand(e);
    }
    const MatrixXcd ht = hermitize(t.adjoint() * h * t);
    if (m > m0) {
      // The extra direction is N-orthogonal to the kept block only up to roundoff.
      const MatrixXcd nt = hermitize(t.adjoint() * problem.n_eff * t);
      Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXcd> gs(ht, nt);
      if (gs.info() != Eigen::Success) throw NumericalError("reduced eigensolve failed at site " + std::to_string(problem.site));
      sol.xi = gs.eigenvalues()(0);
      x = gs.eigenvectors().col(0);
    } else {
      Eigen::SelfAdjointEigenSolver<MatrixXcd> small(ht);
      if (small.info() != Eigen::Success) throw NumericalError("reduced eigensolve failed at site " + std::to_string(problem.site));
      sol.xi = small.eigenvalues()(0);
      x = small.eigenvectors().col(0);
    }
  } else {
    VectorXcd start = VectorXcd::Constant(m, 1.0);
    if (start_kept.size() == m0) {
      start.head(m0) = start_kept;
      if (m > m0) start(m0) = extra_weight;
    }
    const MatVec apply = [&](const VectorXcd& in, VectorXcd& out) {
      const VectorXcd y = expand(in);
      const VectorXcd hy = h * y;
      out = contract(hy);
    };
    LanczosOptions opts;
    // Capped: every Ritz value already improves on the warm start, and the
    // next sweep resumes from there.
    opts.krylov_dim = 48;
    opts.max_restarts = 8;
    opts.tol = 1e-12;
    RitzPair ritz = lowest_eigenpair(apply, m, start, opts);
    sol.xi = ritz.value;
    x = ritz.vector;
  }

  VectorXcd a = expand(x);
  const double na = a.dot(problem.n_eff * a).real();
  if (!(na > 0.0) || !std::isfinite(na)) {
    throw SingularEnvironmentError("solution has vanishing norm at site " + std::to_string(problem.site));
  }
  a /= std::sqrt(na);
  const double quotient = a.dot(h * a).real() / a.dot(problem.n_eff * a).real();
  sol.deviation = sol.xi - quotient;
  sol.a = std::move(a);
  return sol;
}

double peps_energy(const PepsState& state, const HamiltonianParams& params) {
  const LocalEigProblem p = build_effective_pair(state, params, 1);
  const VectorXcd& a = state.at(1).data;
  const double norm = a.dot(p.n_eff * a).real();
  if (!(norm > 0.0)) throw StateError("state has zero norm");
  return a.dot(p.h_eff * a).real() / norm;
}

namespace {

SolveRecord update_site(PepsState& state, const LocalEigProblem& p, int sweep_number) {
  const int k = p.site;
  SolveRecord sr;
  sr.site = k;
  try {
    const VectorXcd& current = state.at(k).data;
    const double current_norm = current.dot(p.n_eff * current).real();
    const double current_energy = current.dot(p.h_eff * current).real() / current_norm;
    const GevpSolution sol = solve_local_gevp(p, state.config.regularization_eps, &current);
    // Dropping near-null directions of N_eff can cost more than the solve
    // gains; keep the old tensor then so that no update raises the energy.
    if (std::isfinite(current_energy) && current_norm > 0.0 && sol.xi > current_energy) {
      sr.rejected = true;
      sr.xi = current_energy;
    } else {
      state.at(k).data = sol.a;
      sr.xi = sol.xi;
    }
    sr.deviation = sol.deviation;
    sr.condition = sol.condition;
    sr.regularized = sol.regularized;
  } catch (const SingularEnvironmentError&) {
    std::mt19937_64 rng = reinit_rng(state.seed_used, sweep_number, k);
    fill_random(state.at(k), rng);
    sr.reinitialized = true;
    sr.xi = std::numeric_limits<double>::quiet_NaN();
  }
  return sr;
}

}  // namespace

SweepRecord full_sweep(PepsState& state, const HamiltonianParams& params, int sweep_number) {
  check_consistent(state, "state");
  params.validate(state.topology);
  SweepRecord rec;
  rec.sweep = sweep_number;
  rec.min_xi = std::numeric_limits<double>::infinity();
  // Gauge step first: it leaves the state unchanged but tames N_eff.
  balance_bonds(state);
  normalize(state);
  const Reduced r = reduce(state, params);

  auto record = [&](const SolveRecord& sr) {
    if (!sr.reinitialized) {
      rec.min_xi = std::min(rec.min_xi, sr.xi);
      rec.max_deviation = std::max(rec.max_deviation, std::abs(sr.deviation));
      rec.energy = sr.xi;
    }
    rec.regularized = rec.regularized || sr.regularized;
    rec.reinitialized = rec.reinitialized || sr.reinitialized;
    rec.solves.push_back(sr);
  };

  // Blocks of sites j..12 for the clockwise pass, of sites 1..j for the
  // counterclockwise one; each is rebuilt only when a tensor inside changes.
  std::vector<Channels> right(kNumSites + 2);
  std::vector<Channels> left(kNumSites + 1);
  right[kNumSites + 1] = start_block(state);
  for (int j = kNumSites; j >= 2; --j) right[j] = grow_right(state, r, right[j + 1], j);
  left[0] = start_block(state);

  for (int k = 1; k <= kNumSites; ++k) {
    const LocalEigProblem p = assemble(state, r, combine(state, r, left[k - 1], right[k + 1], k), k);
    record(update_site(state, p, sweep_number));
    right[k + 1].clear();
    if (k < kNumSites) left[k] = grow_left(state, r, left[k - 1], k);
  }
  Channels back = start_block(state);
  for (int k = kNumSites; k >= 1; --k) {
    const LocalEigProblem p = assemble(state, r, combine(state, r, left[k - 1], back, k), k);
    record(update_site(state, p, sweep_number));
    left[k - 1].clear();
    if (k > 1) back = grow_right(state, r, back, k);
  }
  if (rec.reinitialized || !std::isfinite(rec.energy)) {
    normalize(state);
    rec.energy = peps_energy(state, params);
  }
  return rec;
}

void balance_bonds(PepsState& state) {
  check_consistent(state, "state");
  for (int k = 1; k <= kNumSites; ++k) balance_bond(state.at(k), kRingNext, state.at(wrap(k + 1)), kRingPrev);
  for (int k = 2; k <= kNumSites; k += 2) balance_bond(state.at(k), kHexNext, state.at(wrap(k + 2)), kHexPrev);
}

void normalize(PepsState& state) {
  const double norm = contract_scalar(state, state).real();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw StateError("cannot normalize a zero-norm state");
  const double factor = std::pow(norm, -1.0 / (2.0 * kNumSites));
  for (PepsTensor& t : state.tensors) t.data *= factor;
}

OptimizationResult optimize(const PepsConfig& config, const HamiltonianParams& params, const KagomeTopology& topology) {
  params.validate(topology);
  OptimizationResult result{init_random(config, topology), {}, 0.0};
  PepsState& state = result.state;
  normalize(state);
  double previous = peps_energy(state, params);
  result.trace.rows.push_back({0, previous, std::numeric_limits<double>::quiet_NaN(), 0.0, false, false});
  result.energy = previous;
  for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    SweepRecord rec = full_sweep(state, params, sweep);
    const double delta = rec.energy - previous;
    result.trace.rows.push_back({sweep, rec.energy, delta, rec.max_deviation, rec.regularized, rec.reinitialized});
    result.trace.sweeps.push_back(std::move(rec));
    result.energy = result.trace.rows.back().energy;
    previous = result.energy;
    if (std::abs(delta) < config.convergence_tol) {
      result.trace.converged = true;
      break;
    }
  }
  return result;
}

std::array<double, kNumSites> peps_local_occupations(const PepsState& state) {
  const double norm = contract_scalar(state, state).real();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw StateError("state has zero norm");
  const MatrixXcd num = number_operator(state.at(1).dims[kPhys]);
  std::array<double, kNumSites> occ{};
  for (int k = 1; k <= kNumSites; ++k) occ[k - 1] = contract_scalar(state, state, {{k, num}}).real() / norm;
  return occ;
}

}  // namespace kagome
