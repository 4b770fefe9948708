use vqc_compress::circuit::{parse_circuit, reference_circuit, write_circuit};
use vqc_compress::transpiler::{tcd, BasisGateSet, DepthTable, GENERIC_ANGLE};

#[test]
fn depth_table_matches_golden_file() {
    let golden = include_str!("../golden/depth_table.csv");
    let built = DepthTable::build(&BasisGateSet::default()).unwrap();
    assert_eq!(built.to_csv(), golden);
    assert_eq!(DepthTable::from_csv(golden).unwrap(), built);
}

#[test]
fn reference_circuits() {
    let b = BasisGateSet::default();
    for (name, qubits, gates, depth) in [("syn4", 2, 14, 51), ("syn16", 4, 22, 74)] {
        let c = reference_circuit(name).unwrap();
        assert_eq!(c.n_qubits, qubits);
        assert_eq!(c.trainable_gates().len(), gates);
        let generic = vec![GENERIC_ANGLE; c.n_params()];
        assert_eq!(tcd(&c, &generic, &b).unwrap(), depth, "{name}");
        assert_eq!(parse_circuit(&write_circuit(&c)).unwrap(), c);
    }
}
