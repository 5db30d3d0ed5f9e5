#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geoctl/core/error.hpp"
#include "geoctl/core/linalg.hpp"
#include "geoctl/vecfield/vector_field.hpp"

namespace geoctl {

/// One stage D^(k) of a derived flag at a point.
struct FlagStage {
  int depth = 0;
  int rank = 0;
  std::vector<std::string> words;  ///< spanning bracket words, length-lex order
  Mat vectors;                     ///< evaluated spanning vectors as columns
  RationalMatrix exact_vectors;    ///< same, one row per word (exact mode only)
};

struct DistributionFlag {
  std::vector<double> point;
  std::optional<RationalVector> exact_point;
  int ambient = 0;
  bool exact = false;
  bool complete = false;  ///< stabilized or reached full rank within maxdepth
  double tol = 0.0;
  std::vector<FlagStage> stages;
  std::vector<int> growth;
};

inline PolyVectorField bracket_of(const PolyVectorField& a, const PolyVectorField& b) { return lie_bracket(a, b); }
inline std::vector<double> eval_field(const PolyVectorField& x, const std::vector<double>& p) { return x.eval(p); }
inline std::size_t field_dim(const PolyVectorField& x) { return x.nvars(); }

/// Lazily builds right-normed bracket words [X_i1,[X_i2,...,X_ik]] of a frame,
/// depth by depth. Only words new at the previous depth are bracketed, which
/// spans D^(k+1) = D^(k) + [D, D^(k)] as a module. Words are cached so the
/// builder can be reused across points.
template <class Field>
class FlagBuilder {
 public:
  struct Word {
    std::string label;
    Field field;
  };

  explicit FlagBuilder(std::vector<Field> frame, std::vector<std::string> names = {}) : frame_(std::move(frame)) {
    if (frame_.empty()) throw InvalidArgument("derived flag of an empty frame");
    if (names.empty())
      for (std::size_t i = 0; i < frame_.size(); ++i) names.push_back("X" + std::to_string(i + 1));
    std::vector<Word> d1;
    for (std::size_t i = 0; i < frame_.size(); ++i) d1.push_back({names[i], frame_[i]});
    words_.push_back(std::move(d1));
    names_ = std::move(names);
  }

  std::size_t ambient() const { return field_dim(frame_[0]); }

  const std::vector<Word>& words_at(int depth) {
    while (static_cast<int>(words_.size()) < depth) {
      std::vector<Word> next;
      const auto& prev = words_.back();
      const bool first = words_.size() == 1;
      for (std::size_t i = 0; i < frame_.size(); ++i) {
        for (std::size_t w = 0; w < prev.size(); ++w) {
          if (first && w <= i) continue;  // [X_i,X_i] = 0 and [X_j,X_i] = -[X_i,X_j]
          Field b = bracket_of(frame_[i], prev[w].field);
          if (b.is_zero()) continue;
          next.push_back({"[" + names_[i] + "," + prev[w].label + "]", std::move(b)});
        }
      }
      words_.push_back(std::move(next));
    }
    return words_[static_cast<std::size_t>(depth - 1)];
  }

  /// Floating-point flag; ranks by singular values above tol * largest.
  DistributionFlag evaluate(const std::vector<double>& x, int maxdepth, double tol) {
    DistributionFlag flag;
    flag.point = x;
    flag.ambient = static_cast<int>(ambient());
    flag.tol = tol;
    if (x.size() != ambient()) throw DimensionMismatch("derived_flag: point dimension differs from chart");
    std::vector<std::vector<double>> cols;
    std::vector<std::string> labels;
    for (int k = 1; k <= maxdepth; ++k) {
      for (const auto& w : words_at(k)) {
        cols.push_back(eval_field(w.field, x));
        labels.push_back(w.label);
      }
      Mat v(flag.ambient, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t j = 0; j < cols.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = to_vec(cols[j]);
      FlagStage st;
      st.depth = k;
      st.words = labels;
      st.vectors = v;
      st.rank = numeric_rank(v, tol);
      if (push(flag, std::move(st))) return flag;
    }
    return flag;
  }

  /// Exact flag over the rationals (requires Field with rational evaluation).
  DistributionFlag evaluate_exact(const RationalVector& x, int maxdepth) {
    DistributionFlag flag;
    flag.exact = true;
    flag.exact_point = x;
    flag.point = to_double(x);
    flag.ambient = static_cast<int>(ambient());
    if (x.size() != ambient()) throw DimensionMismatch("derived_flag: point dimension differs from chart");
    RationalMatrix rows;
    std::vector<std::string> labels;
    for (int k = 1; k <= maxdepth; ++k) {
      for (const auto& w : words_at(k)) {
        rows.push_back(w.field.eval(x));
        labels.push_back(w.label);
      }
      FlagStage st;
      st.depth = k;
      st.words = labels;
      st.exact_vectors = rows;
      st.vectors.resize(flag.ambient, static_cast<Eigen::Index>(rows.size()));
      for (std::size_t j = 0; j < rows.size(); ++j)
        for (int i = 0; i < flag.ambient; ++i) st.vectors(i, static_cast<Eigen::Index>(j)) = rows[j][static_cast<std::size_t>(i)].get_d();
      st.rank = static_cast<int>(exact_rank(rows));
      if (push(flag, std::move(st))) return flag;
    }
    return flag;
  }

 private:
  // Appends a stage; returns true once the flag is complete.
  static bool push(DistributionFlag& flag, FlagStage st) {
    const int r = st.rank;
    const bool repeated = !flag.growth.empty() && flag.growth.back() == r;
    flag.growth.push_back(r);
    flag.stages.push_back(std::move(st));
    if (repeated || r == flag.ambient) {
      flag.complete = true;
      return true;
    }
    return false;
  }

  std::vector<Field> frame_;
  std::vector<std::string> names_;
  std::vector<std::vector<Word>> words_;
};

/// Exact derived flag of a polynomial frame at a rational point.
inline DistributionFlag derived_flag(const std::vector<PolyVectorField>& frame, const RationalVector& x, int maxdepth = 8) {
  return FlagBuilder<PolyVectorField>(frame).evaluate_exact(x, maxdepth);
}

/// Floating derived flag at a double point.
inline DistributionFlag derived_flag(const std::vector<PolyVectorField>& frame, const std::vector<double>& x, int maxdepth,
                                     double tol) {
  return FlagBuilder<PolyVectorField>(frame).evaluate(x, maxdepth, tol);
}

inline bool is_cartan(const DistributionFlag& f) {
  return f.ambient == 5 && f.growth == std::vector<int>{2, 3, 5};
}

inline bool is_cartan(const std::vector<PolyVectorField>& frame, const RationalVector& x) {
  if (frame.empty() || frame[0].nvars() != 5) throw DimensionMismatch("is_cartan: ambient dimension must be 5");
  return is_cartan(derived_flag(frame, x, 4));
}

inline bool is_bracket_generating(const DistributionFlag& f) {
  return !f.growth.empty() && f.growth.back() == f.ambient;
}

inline bool is_bracket_generating(const std::vector<PolyVectorField>& frame, const RationalVector& x, int maxdepth) {
  return is_bracket_generating(derived_flag(frame, x, maxdepth));
}

/// Depth at which the flag first reaches the ambient dimension, or 0.
inline int generating_depth(const DistributionFlag& f) {
  for (std::size_t k = 0; k < f.growth.size(); ++k)
    if (f.growth[k] == f.ambient) return static_cast<int>(k + 1);
  return 0;
}

/// Stage k (1-based), failing when beyond the computed depth. A flag that
/// stabilized early keeps its final stage for every larger k.
inline const FlagStage& flag_stage(const DistributionFlag& f, int k) {
  if (k < 1) throw InvalidArgument("flag stage index must be >= 1");
  if (k <= static_cast<int>(f.stages.size())) return f.stages[static_cast<std::size_t>(k - 1)];
  if (f.complete && !f.stages.empty()) return f.stages.back();
  throw InvalidArgument("flag stage beyond computed depth");
}

/// Exact basis of the annihilator of D^(k).
inline std::vector<Covector<Rational>> annihilator_basis_exact(const DistributionFlag& f, int k) {
  if (!f.exact) throw Unsupported("exact annihilator requires an exact flag");
  const auto& st = flag_stage(f, k);
  const auto basis = exact_nullspace(st.exact_vectors, static_cast<std::size_t>(f.ambient));
  std::vector<Covector<Rational>> out;
  for (const auto& b : basis) out.emplace_back(*f.exact_point, b);
  return out;
}

/// Annihilator basis as double covectors (orthonormal in floating mode).
inline std::vector<Covector<double>> annihilator_basis(const DistributionFlag& f, int k) {
  std::vector<Covector<double>> out;
  if (f.exact) {
    for (const auto& c : annihilator_basis_exact(f, k)) out.emplace_back(f.point, to_double(c.components));
    return out;
  }
  const Mat ann = left_nullspace(flag_stage(f, k).vectors, f.tol);
  for (Eigen::Index j = 0; j < ann.cols(); ++j) out.emplace_back(f.point, to_std(ann.col(j)));
  return out;
}

}  // namespace geoctl
