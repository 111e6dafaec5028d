"""Naive-loop agreement metrics, kept independent of the library under test.

The matrix is expanded into the explicit list of (gold, predicted) pairs and
every quantity is counted by iterating that list, so any algebraic mistake in
the library's closed-form arithmetic would show up as a mismatch.
"""


def expand_pairs(mm, mr, rm, rr, im=0, ir=0):
    pairs = []
    pairs += [("m", "m")] * mm
    pairs += [("m", "r")] * mr
    pairs += [("r", "m")] * rm
    pairs += [("r", "r")] * rr
    pairs += [("i", "m")] * im
    pairs += [("i", "r")] * ir
    return pairs


def oracle_agreement(pairs):
    agreed = 0
    for gold, predicted in pairs:
        if gold == predicted:
            agreed += 1
    return agreed / len(pairs)


def oracle_expected_agreement(pairs):
    n = len(pairs)
    total = 0.0
    for category in ("m", "r", "i"):
        gold_count = 0
        predicted_count = 0
        for gold, predicted in pairs:
            if gold == category:
                gold_count += 1
            if predicted == category:
                predicted_count += 1
        total += (gold_count / n) * (predicted_count / n)
    return total


def oracle_kappa(pairs):
    p_o = oracle_agreement(pairs)
    p_e = oracle_expected_agreement(pairs)
    if p_e >= 1.0:
        return (1.0 if p_o == 1.0 else 0.0), p_o, p_e
    return (p_o - p_e) / (1.0 - p_e), p_o, p_e


def oracle_prf(pairs, positive):
    tp = fp = fn = 0
    for gold, predicted in pairs:
        if predicted == positive and gold == positive:
            tp += 1
        elif predicted == positive:
            fp += 1
        elif gold == positive:
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def oracle_macro_f1(pairs):
    f1s = [oracle_prf(pairs, positive)[2] for positive in ("m", "r")]
    return sum(f1s) / len(f1s)
