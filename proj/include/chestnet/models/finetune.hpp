#pragma once

#include "chestnet/models/model.hpp"

namespace chestnet::models {

enum class FineTuneMode { none, freeze_all_but_final_fc };

// Transfer-learning setup: in freeze mode every layer except the final
// fully-connected head is marked frozen, so optimizer steps leave those
// tensors bit-identical.
template <typename T>
void fine_tune_setup(Model<T>& model, FineTuneMode mode) {
    std::size_t head = model.layer_count();
    for (std::size_t i = model.layer_count(); i-- > 0;) {
        if (model.layer(i).kind() == "fully_connected") {
            head = i;
            break;
        }
    }
    if (head == model.layer_count())
        throw ValueError("fine_tune_setup: model '" + model.spec().name +
                         "' has no fully-connected head");
    for (std::size_t i = 0; i < model.layer_count(); ++i)
        model.layer(i).frozen =
            mode == FineTuneMode::freeze_all_but_final_fc && i != head;
}

} // namespace chestnet::models
