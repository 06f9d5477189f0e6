// Copyright 2026 The Seqform Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "seqform/game.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace seqform {

namespace {

// Divisor that makes ||F(z)||_inf <= 1 hold over all valid strategy
// pairs: the largest best-response value of any |A| row over the other
// player's flow polytope (and symmetrically for columns). Dividing by the
// max-abs entry instead is not enough; a column the opponent can reach
// with several unit-mass sequences pushes a gradient entry past 1.
double operator_bound(const Treeplex& tp_x, const Treeplex& tp_y,
                      const std::map<std::pair<int, int>, double>& raw) {
  std::vector<std::vector<std::pair<int, double>>> rows(tp_x.dim());
  std::vector<std::vector<std::pair<int, double>>> cols(tp_y.dim());
  for (const auto& [key, v] : raw) {
    rows[key.first].push_back({key.second, std::abs(v)});
    cols[key.second].push_back({key.first, std::abs(v)});
  }
  double bound = 0.0;
  std::vector<double> buf(std::max(tp_x.dim(), tp_y.dim()), 0.0);
  auto scan = [&](const auto& lines, const Treeplex& opponent) {
    for (const auto& line : lines) {
      if (line.empty()) continue;
      for (const auto& [j, v] : line) buf[j] = v;
      std::span<const double> g(buf.data(), opponent.dim());
      bound = std::max(bound,
                       best_response(opponent, g, 0.0, Sense::kMax).value);
      for (const auto& [j, v] : line) buf[j] = 0.0;
    }
  };
  scan(rows, tp_y);
  scan(cols, tp_x);
  return bound;
}

std::vector<PayoffEntry> normalize(const Treeplex& tp_x, const Treeplex& tp_y,
                                   std::map<std::pair<int, int>, double> raw,
                                   double* scale_out) {
  double scale = operator_bound(tp_x, tp_y, raw);
  if (scale == 0.0) scale = 1.0;
  std::vector<PayoffEntry> entries;
  entries.reserve(raw.size());
  for (const auto& [key, v] : raw) {
    if (v == 0.0) continue;
    entries.push_back(PayoffEntry{key.first, key.second, v / scale});
  }
  *scale_out = scale;
  return entries;
}

}  // namespace

GameSpec::GameSpec(Treeplex tp_x, Treeplex tp_y,
                   std::vector<PayoffEntry> payoffs, double scale)
    : tp_x_(std::move(tp_x)),
      tp_y_(std::move(tp_y)),
      payoffs_(std::move(payoffs)),
      scale_(scale) {
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) {
    throw std::invalid_argument("scale must be positive and finite");
  }
  for (const PayoffEntry& e : payoffs_) {
    if (e.x_seq < 0 || e.x_seq >= tp_x_.dim() || e.y_seq < 0 ||
        e.y_seq >= tp_y_.dim()) {
      throw std::invalid_argument("payoff entry out of range");
    }
    if (std::abs(e.value) > 1.0 || !std::isfinite(e.value)) {
      throw std::invalid_argument("payoff entry outside [-1, 1]");
    }
  }
  std::sort(payoffs_.begin(), payoffs_.end(),
            [](const PayoffEntry& a, const PayoffEntry& b) {
              return std::tie(a.x_seq, a.y_seq) < std::tie(b.x_seq, b.y_seq);
            });
  for (size_t k = 1; k < payoffs_.size(); ++k) {
    if (payoffs_[k].x_seq == payoffs_[k - 1].x_seq &&
        payoffs_[k].y_seq == payoffs_[k - 1].y_seq) {
      throw std::invalid_argument("duplicate payoff entry");
    }
  }

  row_ptr_.assign(tp_x_.dim() + 1, 0);
  for (const PayoffEntry& e : payoffs_) ++row_ptr_[e.x_seq + 1];
  for (int i = 0; i < tp_x_.dim(); ++i) row_ptr_[i + 1] += row_ptr_[i];

  col_order_.resize(payoffs_.size());
  for (size_t k = 0; k < payoffs_.size(); ++k) {
    col_order_[k] = static_cast<int>(k);
  }
  std::sort(col_order_.begin(), col_order_.end(), [&](int a, int b) {
    return std::tie(payoffs_[a].y_seq, payoffs_[a].x_seq) <
           std::tie(payoffs_[b].y_seq, payoffs_[b].x_seq);
  });
  col_ptr_.assign(tp_y_.dim() + 1, 0);
  for (const PayoffEntry& e : payoffs_) ++col_ptr_[e.y_seq + 1];
  for (int j = 0; j < tp_y_.dim(); ++j) col_ptr_[j + 1] += col_ptr_[j];
}

GradientPair GameSpec::payoff_operator_serial(const SequenceStrategy& x,
                                              const SequenceStrategy& y) const {
  if (x.size() != tp_x_.dim() || y.size() != tp_y_.dim()) {
    throw std::invalid_argument("strategy dimension mismatch");
  }
  GradientPair g;
  g.x.assign(tp_x_.dim(), 0.0);
  g.y.assign(tp_y_.dim(), 0.0);
  for (int i = 0; i < tp_x_.dim(); ++i) {
    double acc = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      acc += payoffs_[k].value * y[payoffs_[k].y_seq];
    }
    g.x[i] = acc;
  }
  for (int j = 0; j < tp_y_.dim(); ++j) {
    double acc = 0.0;
    for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
      const PayoffEntry& e = payoffs_[col_order_[k]];
      acc += e.value * x[e.x_seq];
    }
    g.y[j] = -acc;
  }
  return g;
}

GradientPair GameSpec::payoff_operator(const SequenceStrategy& x,
                                       const SequenceStrategy& y) const {
  if (x.size() != tp_x_.dim() || y.size() != tp_y_.dim()) {
    throw std::invalid_argument("strategy dimension mismatch");
  }
  GradientPair g;
  g.x.assign(tp_x_.dim(), 0.0);
  g.y.assign(tp_y_.dim(), 0.0);
  const int m = tp_x_.dim();
  const int n = tp_y_.dim();
#pragma omp parallel
  {
#pragma omp for schedule(static) nowait
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        acc += payoffs_[k].value * y[payoffs_[k].y_seq];
      }
      g.x[i] = acc;
    }
#pragma omp for schedule(static)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
        const PayoffEntry& e = payoffs_[col_order_[k]];
        acc += e.value * x[e.x_seq];
      }
      g.y[j] = -acc;
    }
  }
  return g;
}

double GameSpec::bilinear_value(const SequenceStrategy& x,
                                const SequenceStrategy& y) const {
  if (x.size() != tp_x_.dim() || y.size() != tp_y_.dim()) {
    throw std::invalid_argument("strategy dimension mismatch");
  }
  double v = 0.0;
  for (const PayoffEntry& e : payoffs_) {
    v += e.value * x[e.x_seq] * y[e.y_seq];
  }
  return v;
}

// ---------------------------------------------------------------------------
// Kuhn poker

GameSpec build_kuhn() {
  static const char* kCards = "JQK";
  // Per card: player 1 has the opening decision and the facing-bet
  // decision; player 2 reacts to a check or to a bet. Two actions each.
  std::vector<Treeplex::InfoSetSpec> sx, sy;
  for (int c = 0; c < 3; ++c) {
    std::string card(1, kCards[c]);
    sx.push_back({kNoParent, 2, card});              // check, bet
    sx.push_back({c * 4 + 0, 2, card + ":cb"});      // fold, call
    sy.push_back({kNoParent, 2, card + ":c"});       // check, bet
    sy.push_back({kNoParent, 2, card + ":b"});       // fold, call
  }
  Treeplex tp_x(sx), tp_y(sy);

  auto x_check = [](int c) { return c * 4 + 0; };
  auto x_bet = [](int c) { return c * 4 + 1; };
  auto x_fold = [](int c) { return c * 4 + 2; };
  auto x_call = [](int c) { return c * 4 + 3; };
  auto y_after_check = [](int c, int a) { return c * 4 + a; };  // 0=check,1=bet
  auto y_after_bet = [](int c, int a) { return c * 4 + 2 + a; };  // 0=fold,1=call

  std::map<std::pair<int, int>, double> raw;
  const double p_deal = 1.0 / 6.0;
  for (int c1 = 0; c1 < 3; ++c1) {
    for (int c2 = 0; c2 < 3; ++c2) {
      if (c1 == c2) continue;
      double win2 = c2 > c1 ? 1.0 : -1.0;  // showdown sign for the max player
      raw[{x_check(c1), y_after_check(c2, 0)}] += p_deal * win2;        // kk
      raw[{x_fold(c1), y_after_check(c2, 1)}] += p_deal * 1.0;          // kbf
      raw[{x_call(c1), y_after_check(c2, 1)}] += p_deal * 2.0 * win2;   // kbc
      raw[{x_bet(c1), y_after_bet(c2, 0)}] += p_deal * -1.0;            // bf
      raw[{x_bet(c1), y_after_bet(c2, 1)}] += p_deal * 2.0 * win2;      // bc
    }
  }
  double scale = 0.0;
  std::vector<PayoffEntry> entries = normalize(tp_x, tp_y, std::move(raw),
                                               &scale);
  return GameSpec(std::move(tp_x), std::move(tp_y), std::move(entries), scale);
}

// ---------------------------------------------------------------------------
// Leduc poker

namespace {

// One betting round: at most two raises, check only when not facing a
// raise. Actions: 'k' check, 'r' raise, 'f' fold, 'c' call.
struct RoundDecision {
  std::string hist;
  int to_act;  // 1 or 2
  std::vector<char> actions;
};
struct RoundTerminal {
  std::string hist;
  int folder;  // 0 = both continue, otherwise the player who folded
};

struct RoundShape {
  std::vector<RoundDecision> decisions;
  std::vector<RoundTerminal> terminals;
  std::vector<std::string> continues;
};

void walk_round(const std::string& hist, int to_act, int raises, bool facing,
                RoundShape* out) {
  std::vector<char> acts;
  if (facing) {
    acts = raises >= 2 ? std::vector<char>{'f', 'c'}
                       : std::vector<char>{'f', 'c', 'r'};
  } else {
    acts = {'k', 'r'};
  }
  out->decisions.push_back({hist, to_act, acts});
  for (char a : acts) {
    std::string nh = hist + a;
    switch (a) {
      case 'f':
        out->terminals.push_back({nh, to_act});
        break;
      case 'c':
        out->terminals.push_back({nh, 0});
        break;
      case 'k':
        if (hist.empty()) {
          walk_round(nh, 3 - to_act, raises, false, out);
        } else {
          out->terminals.push_back({nh, 0});
        }
        break;
      case 'r':
        walk_round(nh, 3 - to_act, raises + 1, true, out);
        break;
    }
  }
}

RoundShape round_shape() {
  RoundShape shape;
  walk_round("", 1, 0, false, &shape);
  for (const RoundTerminal& t : shape.terminals) {
    if (t.folder == 0) shape.continues.push_back(t.hist);
  }
  return shape;
}

// Chips each player added during one round (on top of earlier streets).
std::array<double, 3> round_bets(const std::string& hist, double raise_size) {
  std::array<double, 3> bet = {0.0, 0.0, 0.0};
  int to_act = 1;
  double level = 0.0;
  for (char a : hist) {
    if (a == 'r') {
      level += raise_size;
      bet[to_act] = level;
    } else if (a == 'c') {
      bet[to_act] = level;
    }
    to_act = 3 - to_act;
  }
  return bet;
}

constexpr int kLeducCards = 6;
int leduc_rank(int card) { return card / 2; }

std::string leduc_card_name(int card) {
  static const char* kRanks = "JQK";
  static const char* kSuits = "ab";
  return std::string(1, kRanks[card / 2]) + kSuits[card % 2];
}

class LeducBuilder {
 public:
  LeducBuilder() : shape_(round_shape()) {
    build_player(1);
    build_player(2);
  }

  Treeplex treeplex(int player) const { return Treeplex(specs_[player - 1]); }

  // Sequence of `player`'s last own action along the full line.
  int last_seq(int player, int priv, const std::string& h1, int pub,
               const std::string& h2) const {
    int seq = -1;
    int to_act = 1;
    for (size_t k = 0; k < h1.size(); ++k) {
      if (to_act == player) {
        seq = seq_at(player, priv, "", -1, h1.substr(0, k), h1[k]);
      }
      to_act = 3 - to_act;
    }
    if (pub >= 0) {
      to_act = 1;
      for (size_t k = 0; k < h2.size(); ++k) {
        if (to_act == player) {
          seq = seq_at(player, priv, h1, pub, h2.substr(0, k), h2[k]);
        }
        to_act = 3 - to_act;
      }
    }
    return seq;
  }

  const RoundShape& shape() const { return shape_; }

 private:
  static std::string key(int priv, const std::string& h1, int pub,
                         const std::string& hist) {
    std::ostringstream os;
    os << priv << '|' << h1 << '|' << pub << '|' << hist;
    return os.str();
  }

  int seq_at(int player, int priv, const std::string& h1, int pub,
             const std::string& hist, char action) const {
    const auto& m = seq_index_[player - 1];
    auto it = m.find(key(priv, h1, pub, hist) + '|' + action);
    if (it == m.end()) throw std::logic_error("unknown sequence lookup");
    return it->second;
  }

  void add_infoset(int player, int priv, const std::string& h1, int pub,
                   const RoundDecision& d, int parent) {
    std::ostringstream label;
    label << leduc_card_name(priv);
    if (pub >= 0) label << '/' << h1 << '/' << leduc_card_name(pub);
    label << ':' << d.hist;
    auto& specs = specs_[player - 1];
    auto& index = seq_index_[player - 1];
    int first = dims_[player - 1];
    specs.push_back({parent, static_cast<int>(d.actions.size()), label.str()});
    for (size_t a = 0; a < d.actions.size(); ++a) {
      index[key(priv, h1, pub, d.hist) + '|' + d.actions[a]] =
          first + static_cast<int>(a);
    }
    dims_[player - 1] = first + static_cast<int>(d.actions.size());
  }

  // The player's previous own action within the same round, if any.
  int parent_in_round(int player, int priv, const std::string& h1, int pub,
                      const std::string& hist) const {
    int seq = -1;
    int to_act = 1;
    for (size_t k = 0; k < hist.size(); ++k) {
      if (to_act == player) {
        seq = seq_at(player, priv, h1, pub, hist.substr(0, k), hist[k]);
      }
      to_act = 3 - to_act;
    }
    return seq;
  }

  void build_player(int player) {
    for (int priv = 0; priv < kLeducCards; ++priv) {
      for (const RoundDecision& d : shape_.decisions) {
        if (d.to_act != player) continue;
        int parent = parent_in_round(player, priv, "", -1, d.hist);
        add_infoset(player, priv, "", -1, d, parent);
      }
      for (const std::string& h1 : shape_.continues) {
        int round1_last = last_seq(player, priv, h1, -1, "");
        for (int pub = 0; pub < kLeducCards; ++pub) {
          if (pub == priv) continue;
          for (const RoundDecision& d : shape_.decisions) {
            if (d.to_act != player) continue;
            int parent = parent_in_round(player, priv, h1, pub, d.hist);
            if (parent < 0) parent = round1_last;
            add_infoset(player, priv, h1, pub, d, parent);
          }
        }
      }
    }
  }

  RoundShape shape_;
  std::vector<Treeplex::InfoSetSpec> specs_[2];
  std::map<std::string, int> seq_index_[2];
  int dims_[2] = {0, 0};
};

}  // namespace

GameSpec build_leduc() {
  LeducBuilder b;
  const RoundShape& shape = b.shape();

  std::map<std::pair<int, int>, double> raw;
  const double p_deal = 1.0 / (kLeducCards * (kLeducCards - 1));
  for (int c1 = 0; c1 < kLeducCards; ++c1) {
    for (int c2 = 0; c2 < kLeducCards; ++c2) {
      if (c1 == c2) continue;
      // Round-one folds happen before the public card.
      for (const RoundTerminal& t : shape.terminals) {
        if (t.folder == 0) continue;
        auto bets = round_bets(t.hist, 1.0);
        double lost = 1.0 + bets[t.folder];
        double pay2 = t.folder == 1 ? lost : -lost;
        int i = b.last_seq(1, c1, t.hist, -1, "");
        int j = b.last_seq(2, c2, t.hist, -1, "");
        raw[{i, j}] += p_deal * pay2;
      }
      for (const std::string& h1 : shape.continues) {
        auto bets1 = round_bets(h1, 1.0);
        double pot_each = 1.0 + bets1[1];
        for (int pub = 0; pub < kLeducCards; ++pub) {
          if (pub == c1 || pub == c2) continue;
          double p_chance = p_deal / (kLeducCards - 2);
          for (const RoundTerminal& t : shape.terminals) {
            auto bets2 = round_bets(t.hist, 2.0);
            double pay2;
            if (t.folder != 0) {
              double lost = pot_each + bets2[t.folder];
              pay2 = t.folder == 1 ? lost : -lost;
            } else {
              double stake = pot_each + bets2[1];
              int r1 = leduc_rank(c1), r2 = leduc_rank(c2);
              int rp = leduc_rank(pub);
              if (r1 == rp && r2 != rp) {
                pay2 = -stake;
              } else if (r2 == rp && r1 != rp) {
                pay2 = stake;
              } else if (r1 == r2) {
                pay2 = 0.0;
              } else {
                pay2 = r1 > r2 ? -stake : stake;
              }
            }
            if (pay2 == 0.0) continue;
            int i = b.last_seq(1, c1, h1, pub, t.hist);
            int j = b.last_seq(2, c2, h1, pub, t.hist);
            raw[{i, j}] += p_chance * pay2;
          }
        }
      }
    }
  }

  Treeplex tp_x = b.treeplex(1);
  Treeplex tp_y = b.treeplex(2);
  double scale = 0.0;
  std::vector<PayoffEntry> entries = normalize(tp_x, tp_y, std::move(raw),
                                               &scale);
  return GameSpec(std::move(tp_x), std::move(tp_y), std::move(entries), scale);
}

// ---------------------------------------------------------------------------

GameSpec build_matrix_game(const std::vector<std::vector<double>>& raw) {
  if (raw.empty() || raw[0].empty()) {
    throw std::invalid_argument("matrix game needs at least one entry");
  }
  const int m = static_cast<int>(raw.size());
  const int n = static_cast<int>(raw[0].size());
  std::map<std::pair<int, int>, double> entries;
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(raw[i].size()) != n) {
      throw std::invalid_argument("ragged payoff matrix");
    }
    for (int j = 0; j < n; ++j) entries[{i, j}] = raw[i][j];
  }
  Treeplex tp_x({{kNoParent, m, "root"}});
  Treeplex tp_y({{kNoParent, n, "root"}});
  double scale = 0.0;
  std::vector<PayoffEntry> norm = normalize(tp_x, tp_y, std::move(entries),
                                            &scale);
  return GameSpec(std::move(tp_x), std::move(tp_y), std::move(norm), scale);
}

// ---------------------------------------------------------------------------
// JSON round trip

namespace {

Treeplex treeplex_from_json(const nlohmann::json& j, int player) {
  std::vector<Treeplex::InfoSetSpec> specs;
  const auto& infosets = j.at("infosets");
  for (size_t h = 0; h < infosets.size(); ++h) {
    const auto& is = infosets[h];
    if (is.at("id").get<int>() != static_cast<int>(h)) {
      std::ostringstream os;
      os << "player " << player << " infoset " << h << ": id out of order";
      throw std::runtime_error(os.str());
    }
    Treeplex::InfoSetSpec spec;
    spec.parent = is.at("parent_seq").is_null()
                      ? kNoParent
                      : is.at("parent_seq").get<int>();
    spec.num_actions = is.at("num_actions").get<int>();
    spec.label = is.value("label", "");
    specs.push_back(std::move(spec));
  }
  return Treeplex(specs);
}

}  // namespace

GameSpec load_game(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open game file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("parse error in " + path + ": " + e.what());
  }
  try {
    const auto& players = j.at("players");
    if (players.size() != 2) {
      throw std::runtime_error("expected exactly two players");
    }
    Treeplex tp_x = treeplex_from_json(players[0], 1);
    Treeplex tp_y = treeplex_from_json(players[1], 2);
    std::vector<PayoffEntry> entries;
    for (const auto& row : j.at("payoffs")) {
      if (!row.is_array() || row.size() != 3) {
        throw std::runtime_error("payoff rows must be [x_seq, y_seq, value]");
      }
      entries.push_back(PayoffEntry{row[0].get<int>(), row[1].get<int>(),
                                    row[2].get<double>()});
    }
    double scale = j.at("scale").get<double>();
    return GameSpec(std::move(tp_x), std::move(tp_y), std::move(entries),
                    scale);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed game file " + path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("invalid game in " + path + ": " + e.what());
  }
}

void save_game(const GameSpec& game, const std::string& path) {
  nlohmann::json j;
  j["players"] = nlohmann::json::array();
  for (const Treeplex* tp : {&game.x(), &game.y()}) {
    nlohmann::json pj;
    pj["infosets"] = nlohmann::json::array();
    for (const InfoSet& is : tp->infosets()) {
      nlohmann::json ij;
      ij["id"] = is.id;
      if (is.parent == kNoParent) {
        ij["parent_seq"] = nullptr;
      } else {
        ij["parent_seq"] = is.parent;
      }
      ij["num_actions"] = is.size;
      ij["label"] = is.label;
      pj["infosets"].push_back(std::move(ij));
    }
    j["players"].push_back(std::move(pj));
  }
  j["payoffs"] = nlohmann::json::array();
  for (const PayoffEntry& e : game.payoffs()) {
    j["payoffs"].push_back({e.x_seq, e.y_seq, e.value});
  }
  j["scale"] = game.scale();

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write game file: " + path);
  out << j.dump(1) << "\n";
}

}  // namespace seqform
