#include "scaleseg/image.hpp"

#include <stdexcept>

namespace scaleseg {

Image make_image(int channels, int h, int w, double fill) {
    if (channels < 1 || h < 1 || w < 1)
        throw std::invalid_argument("make_image: extents must be positive");
    Image img;
    img.channels = channels;
    img.h = h;
    img.w = w;
    img.data.assign(static_cast<std::size_t>(channels) * h * w, fill);
    return img;
}

Mask make_mask(int h, int w, int fill) {
    if (h < 1 || w < 1) throw std::invalid_argument("make_mask: extents must be positive");
    Mask m;
    m.h = h;
    m.w = w;
    m.labels.assign(static_cast<std::size_t>(h) * w, fill);
    return m;
}

Tensor image_to_tensor(const Image& img) {
    return Tensor::leaf({img.channels, img.h, img.w}, img.data, false);
}

Image tensor_to_image(const Tensor& t) {
    if (t.shape().size() != 3)
        throw std::invalid_argument("tensor_to_image: expected rank-3, got " + shape_str(t.shape()));
    Image img;
    img.channels = t.shape()[0];
    img.h = t.shape()[1];
    img.w = t.shape()[2];
    img.data.assign(t.values().begin(), t.values().end());
    return img;
}

Tensor mask_to_fg(const Mask& mask, int object) {
    std::vector<double> v(mask.labels.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = mask.labels[i] == object ? 1.0 : 0.0;
    return Tensor::leaf({1, mask.h, mask.w}, std::move(v), false);
}

Mask binary_mask(const Mask& mask, int object) {
    Mask out = make_mask(mask.h, mask.w);
    for (std::size_t i = 0; i < mask.labels.size(); ++i)
        out.labels[i] = mask.labels[i] == object ? 1 : 0;
    return out;
}

Mask argmax_mask(const Tensor& probs) {
    if (probs.shape().size() != 3)
        throw std::invalid_argument("argmax_mask: expected rank-3, got " + shape_str(probs.shape()));
    const int c = probs.shape()[0], h = probs.shape()[1], w = probs.shape()[2];
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    Mask out = make_mask(h, w);
    auto v = probs.values();
    for (std::size_t p = 0; p < plane; ++p) {
        int best = 0;
        double bv = v[p];
        for (int k = 1; k < c; ++k) {
            if (v[k * plane + p] > bv) {
                bv = v[k * plane + p];
                best = k;
            }
        }
        out.labels[p] = best;
    }
    return out;
}

Image resize_image(const Image& img, int target_h, int target_w) {
    if (img.h == target_h && img.w == target_w) return img;
    return tensor_to_image(bilinear_resize(image_to_tensor(img), target_h, target_w));
}

}  // namespace scaleseg
