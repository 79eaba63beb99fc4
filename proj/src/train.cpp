#include "bodycorr/train.hpp"

#include <cstdio>
#include <sstream>

#include "bodycorr/io.hpp"

namespace bodycorr {

void write_loss_log(const std::vector<LossLogEntry>& log, const std::string& path) {
    std::ostringstream out;
    out << "iteration,task_kind,loss\n";
    char buf[96];
    for (const LossLogEntry& entry : log) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%.9e\n", entry.iteration, entry.task.c_str(),
                      entry.loss);
        out << buf;
    }
    atomic_write_text(path, out.str());
}

}  // namespace bodycorr
