#pragma once

#include <vector>

#include "xalign/types.hpp"

namespace xalign {

// Pools every (language x path) sample of one question into a single vote.
// Abstentions are excluded from the counts and from both partitions. The
// result is canonical: sample refs sorted by (language, path_index), so the
// tally is invariant under input reordering.
VoteResult tally(const std::vector<CotSample>& samples);

// Tied labels resolve to the one backed by the most distinct languages, then
// alphabetically smallest.
Label tie_break(const std::vector<Label>& tied_labels, const std::vector<CotSample>& samples);

}  // namespace xalign
