#include "tassel/autograd.hpp"

#include <unordered_map>

namespace tassel {

template <typename Real>
void backward(const Var<Real>& loss) {
    if (!loss) throw ContractError("backward on empty variable");
    if (loss.value().numel() != 1) throw ContractError("backward requires a scalar loss, got " + shape_str(loss.shape()));
    if (!loss.requires_grad()) return;

    using NodeT = Node<Real>;
    enum class Mark { open, done };
    std::unordered_map<NodeT*, Mark> marks;
    std::vector<NodeT*> order;

    // Iterative post-order DFS; an "open" node met again sits on the current
    // path, which means the graph has a cycle.
    std::vector<std::pair<NodeT*, std::size_t>> stack;
    stack.emplace_back(loss.node(), 0);
    marks[loss.node()] = Mark::open;
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            NodeT* parent = node->parents[next++].get();
            if (!parent->requires_grad) continue;
            auto it = marks.find(parent);
            if (it == marks.end()) {
                marks[parent] = Mark::open;
                stack.emplace_back(parent, 0);
            } else if (it->second == Mark::open) {
                throw InternalError("cycle detected in computation graph");
            }
        } else {
            marks[node] = Mark::done;
            order.push_back(node);
            stack.pop_back();
        }
    }

    loss.node()->grad_ref().fill(Real(1));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        NodeT* node = *it;
        if (node->backward_fn && node->has_grad()) node->backward_fn(*node);
    }
}

template void backward<float>(const Var<float>&);
template void backward<double>(const Var<double>&);

}  // namespace tassel
