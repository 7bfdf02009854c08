#pragma once

// Hard-voting ensembles with first-member tie-break.

#include <concepts>
#include <span>
#include <string>
#include <vector>

#include "iotids/labels.hpp"
#include "iotids/matrix.hpp"

namespace iotids {

template <class M>
concept LabelPredictor = requires(const M& m, const Matrix& x) {
  { m.predict_labels(x) } -> std::convertible_to<std::vector<int>>;
  { m.width() } -> std::convertible_to<std::size_t>;
  { m.classes() } -> std::convertible_to<std::size_t>;
};

/// Mode of `votes`; when several labels share the top count, the label of the
/// earliest member among them wins.
inline int combine_votes(std::span<const int> votes) {
  int best = votes.empty() ? 0 : votes[0];
  std::size_t best_count = 0;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    std::size_t count = 0;
    for (int v : votes) count += v == votes[i];
    if (count > best_count) {
      best_count = count;
      best = votes[i];
    }
  }
  return best;
}

template <LabelPredictor Member>
struct VotingEnsemble {
  std::vector<std::string> names;
  std::vector<Member> members;
  Task task = Task::Binary;

  std::size_t width() const { return members.front().width(); }
  std::size_t classes() const { return members.front().classes(); }
  std::vector<int> predict_labels(const Matrix& x) const;
};

template <LabelPredictor Member>
std::vector<int> vote(const VotingEnsemble<Member>& ens, const Matrix& x) {
  require_width(x, ens.width(), "ensemble");
  std::vector<std::vector<int>> per_member;
  per_member.reserve(ens.members.size());
  for (const auto& m : ens.members) per_member.push_back(m.predict_labels(x));
  std::vector<int> out(x.rows), votes(ens.members.size());
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t m = 0; m < votes.size(); ++m) votes[m] = per_member[m][i];
    out[i] = combine_votes(votes);
  }
  return out;
}

template <LabelPredictor Member>
std::vector<int> VotingEnsemble<Member>::predict_labels(const Matrix& x) const {
  return vote(*this, x);
}

namespace detail {

template <LabelPredictor Member>
VotingEnsemble<Member> make_ensemble(Task task, std::vector<std::string> names, std::vector<Member> members) {
  const std::size_t w = members.front().width();
  const std::size_t c = class_count(task);
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].width() != w || members[i].classes() != c) {
      throw Error(ErrorKind::SchemaMismatch,
                  "hybrid member " + names[i] + " does not share the " + std::string(task_name(task)) + " schema");
    }
  }
  return {std::move(names), std::move(members), task};
}

}  // namespace detail

template <LabelPredictor Member>
VotingEnsemble<Member> build_binary_hybrid(Member rf, Member gbm, Member svm, Member knn) {
  return detail::make_ensemble<Member>(Task::Binary, {"rf", "gbm", "svm", "knn"},
                                       {std::move(rf), std::move(gbm), std::move(svm), std::move(knn)});
}

template <LabelPredictor Member>
VotingEnsemble<Member> build_multiclass_hybrid(Member rf, Member gbm, Member ada) {
  return detail::make_ensemble<Member>(Task::Multiclass, {"rf", "gbm", "ada"},
                                       {std::move(rf), std::move(gbm), std::move(ada)});
}

}  // namespace iotids
