#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scaleseg/image.hpp"

namespace scaleseg {

// Ordered frames with ground-truth masks. The first mask is mandatory
// (semi-supervised contract); later masks are evaluation-only.
struct VideoSequence {
    std::string id;
    std::vector<Image> frames;
    std::vector<std::optional<Mask>> masks;
    int object_count = 1;
};

// The slice of a sequence that inference and adaptation are allowed to see:
// frames plus the first-frame mask. Ground truth for t >= 1 never enters.
struct SequenceInput {
    std::string id;
    std::vector<Image> frames;
    Mask first_mask;
    int object_count = 1;
};

SequenceInput to_input(const VideoSequence& seq);

void validate_sequence(const VideoSequence& seq);

}  // namespace scaleseg
