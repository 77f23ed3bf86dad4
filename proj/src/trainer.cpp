#include "senti/trainer.hpp"

#include <json.hpp>

#include <fstream>

namespace senti {

void TrainingLog::save_jsonl(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& e : entries) {
        nlohmann::json j;
        j["step"] = e.step;
        j["l_w"] = e.l_w;
        j["l_s"] = e.l_s;
        j["total"] = e.total;
        if (e.sgts) j["sgts"] = *e.sgts;
        out << j.dump() << "\n";
    }
}

}  // namespace senti
